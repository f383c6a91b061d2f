#include <gtest/gtest.h>

#include "ima/text.hpp"

using namespace ima;

TEST(Trim, StripsAsciiWhitespaceOnBothEnds)
{
    EXPECT_EQ(trim("  a b \n\t"), "a b");
    EXPECT_EQ(trim(""), "");
    EXPECT_EQ(trim(" \r\n "), "");
}

TEST(SubstituteOnce, ReplacesEachPlaceholder)
{
    EXPECT_EQ(substitute_once("hi [A], bye [B]", {{"[A]", "x"}, {"[B]", "y"}}), "hi x, bye y");
}

TEST(SubstituteOnce, DoesNotRescanInsertedValues)
{
    // A value that itself contains a placeholder must come through untouched.
    EXPECT_EQ(substitute_once("[A] [B]", {{"[A]", "[B]"}, {"[B]", "z"}}), "[B] z");
}

TEST(ContainsToken, RespectsWordBoundaries)
{
    EXPECT_TRUE(contains_token("I ACCEPT this", "ACCEPT"));
    EXPECT_TRUE(contains_token("ACCEPT", "ACCEPT"));
    EXPECT_TRUE(contains_token("(ACCEPT).", "ACCEPT"));
    EXPECT_FALSE(contains_token("ACCEPTANCE", "ACCEPT"));
    EXPECT_FALSE(contains_token("UNACCEPT", "ACCEPT"));
    EXPECT_FALSE(contains_token("ACCEPT_ME", "ACCEPT"));
    EXPECT_TRUE(contains_token("ACCEPTANCE then ACCEPT", "ACCEPT"));
    EXPECT_FALSE(contains_token("accept", "ACCEPT"));
    EXPECT_FALSE(contains_token("anything", ""));
}

TEST(Lowercase, AsciiOnly)
{
    EXPECT_EQ(lowercase("Cost-Effectiveness"), "cost-effectiveness");
}

TEST(DumpJson, InvalidUtf8IsReplacedNotThrown)
{
    nlohmann::json j = std::string("\xff");
    EXPECT_NO_THROW(dump_json(j));
}
