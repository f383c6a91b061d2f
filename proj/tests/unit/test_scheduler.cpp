#include <gtest/gtest.h>

#include "ima/errors.hpp"
#include "ima/scheduler.hpp"

using namespace ima;

namespace {

// Straight transcription of the selection rule, kept separate from the
// production policy so the two can be checked against each other.
struct ReferenceScheduler {
    std::vector<std::string> workers{"BOA", "DEA", "MLE", "IA"};
    long wc = 0;

    std::string next(const std::string& last, bool finalize)
    {
        if (last.empty()) {
            return "CDA";
        }
        if (finalize) {
            return "DJE";
        }
        if (last == "CDA") {
            return workers[static_cast<std::size_t>(wc++ % 4)];
        }
        if (last == "KIA") {
            return "EA";
        }
        if (last == "EA") {
            return "CDA";
        }
        return wc % 4 == 0 ? "KIA" : "CDA";
    }
};

TurnRecord turn(std::int64_t index, std::string speaker, std::string text)
{
    TurnRecord r;
    r.turn_index = index;
    r.speaker = std::move(speaker);
    r.output_text = std::move(text);
    r.flags = detect_flags(r.output_text);
    return r;
}

}  // namespace

TEST(DetectFlags, Examples)
{
    EXPECT_EQ(detect_flags("I ACCEPT this proposal"), (Flags{true, false}));
    EXPECT_EQ(detect_flags("FINALIZATION ready"), (Flags{false, true}));
    EXPECT_EQ(detect_flags("accepting"), (Flags{false, false}));
    EXPECT_EQ(detect_flags("ACCEPTANCE criteria"), (Flags{false, false}));
    EXPECT_EQ(detect_flags("ACCEPT. FINALIZE"), (Flags{true, true}));
    EXPECT_EQ(detect_flags("PREFINALIZED"), (Flags{false, true}));
    EXPECT_EQ(detect_flags("Finalize"), (Flags{false, false}));
}

TEST(NextSpeaker, ConversationStartsWithCoordinator)
{
    SchedulerState s;
    EXPECT_EQ(next_speaker(s, std::nullopt, "task text"), "CDA");
    EXPECT_EQ(s.turn_counter, 1);
}

TEST(NextSpeaker, AfterCoordinatorComesNextWorker)
{
    SchedulerState s;
    EXPECT_EQ(next_speaker(s, "CDA", "x"), "BOA");
    EXPECT_EQ(s.worker_counter, 1);
}

TEST(NextSpeaker, FullWorkerCycleRoutesToSummarizer)
{
    SchedulerState s;
    s.worker_counter = 4;
    EXPECT_EQ(next_speaker(s, "IA", "x"), "KIA");
    EXPECT_EQ(next_speaker(s, "KIA", "x"), "EA");
    EXPECT_EQ(next_speaker(s, "EA", "x"), "CDA");
    s.worker_counter = 3;
    EXPECT_EQ(next_speaker(s, "MLE", "x"), "CDA");
}

TEST(NextSpeaker, FinalizeRoutesToDocumenterFromAnySpeaker)
{
    for (const char* last : {"CDA", "BOA", "KIA", "EA"}) {
        SchedulerState s;
        EXPECT_EQ(next_speaker(s, std::string(last), "ok, FINALIZE now"), "DJE");
        EXPECT_EQ(s.phase, Phase::finalizing);
    }
}

TEST(NextSpeaker, UnknownSpeakerIsAnError)
{
    SchedulerState s;
    EXPECT_THROW(next_speaker(s, std::string("ZZZ"), "x"), SchedulerError);
    EXPECT_EQ(s.turn_counter, 0);
}

TEST(NextSpeaker, DoneIsAPreconditionError)
{
    SchedulerState s;
    s.phase = Phase::done;
    EXPECT_THROW(next_speaker(s, std::nullopt, ""), PreconditionError);
}

TEST(NextSpeaker, HundredTurnTraceMatchesReference)
{
    SchedulerState s;
    ReferenceScheduler ref;
    std::string last;
    std::vector<std::string> trace;
    for (int i = 0; i < 100; ++i) {
        const auto expected = ref.next(last, false);
        const auto got = next_speaker(s, last.empty() ? std::nullopt : std::optional<std::string>(last), "no flags");
        ASSERT_EQ(got, expected) << "turn " << i + 1;
        trace.push_back(got);
        last = got;
    }
    const std::vector<std::string> head{"CDA", "BOA", "CDA", "DEA", "CDA", "MLE", "CDA", "IA", "KIA", "EA", "CDA"};
    EXPECT_TRUE(std::equal(head.begin(), head.end(), trace.begin()));
    EXPECT_EQ(s.turn_counter, 100);
}

TEST(RolesCanonicalId, AcceptsAliases)
{
    EXPECT_EQ(roles::canonical_id("MLA"), "MLE");
    EXPECT_EQ(roles::canonical_id("ERA"), "EA");
    EXPECT_EQ(roles::canonical_id("DEA"), "DEA");
}

TEST(Consensus, AllLatestWorkerTurnsAccept)
{
    const std::vector<std::string> workers{"BOA", "DEA", "MLE", "IA"};
    std::vector<TurnRecord> turns{turn(1, "CDA", "PROPOSAL v1"), turn(2, "BOA", "ACCEPT"), turn(3, "CDA", "next"),
                                  turn(4, "DEA", "ACCEPT"),     turn(5, "CDA", "next"),   turn(6, "MLE", "ACCEPT"),
                                  turn(7, "CDA", "next")};
    EXPECT_FALSE(consensus_reached(turns, workers));
    turns.push_back(turn(8, "IA", "I ACCEPT"));
    EXPECT_TRUE(consensus_reached(turns, workers));
}

TEST(Consensus, ThreeOfFourIsNotEnough)
{
    const std::vector<std::string> workers{"BOA", "DEA", "MLE", "IA"};
    const std::vector<TurnRecord> turns{turn(1, "CDA", "PROPOSAL"), turn(2, "BOA", "ACCEPT"),
                                        turn(3, "DEA", "ACCEPT"),   turn(4, "MLE", "ACCEPT"),
                                        turn(5, "IA", "not yet")};
    EXPECT_FALSE(consensus_reached(turns, workers));
}

TEST(Consensus, LatestTurnGoverns)
{
    const std::vector<std::string> workers{"BOA", "DEA"};
    const std::vector<TurnRecord> turns{turn(1, "CDA", "PROPOSAL"), turn(2, "BOA", "ACCEPT"),
                                        turn(3, "DEA", "ACCEPT"), turn(4, "BOA", "on reflection, no")};
    EXPECT_FALSE(consensus_reached(turns, workers));
}

TEST(Consensus, NewProposalResetsAcceptances)
{
    const std::vector<std::string> workers{"BOA", "DEA"};
    const std::vector<TurnRecord> turns{turn(1, "CDA", "PROPOSAL"), turn(2, "BOA", "ACCEPT"),
                                        turn(3, "DEA", "ACCEPT"), turn(4, "CDA", "revised PROPOSAL"),
                                        turn(5, "BOA", "ACCEPT")};
    EXPECT_FALSE(consensus_reached(turns, workers));
    EXPECT_TRUE(consensus_reached(std::span(turns).first(3), workers));
}

TEST(Consensus, CustomMarker)
{
    const std::vector<std::string> workers{"BOA"};
    const std::vector<TurnRecord> turns{turn(1, "BOA", "ACCEPT"), turn(2, "CDA", "DRAFT two")};
    EXPECT_FALSE(consensus_reached(turns, workers, "DRAFT"));
    EXPECT_TRUE(consensus_reached(turns, workers, "PROPOSAL"));
}
