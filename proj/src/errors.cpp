#include "ima/errors.hpp"

namespace ima {

namespace {

std::string describe(const std::string& source, const std::vector<Diagnostic>& diagnostics)
{
    std::string out = source + ": invalid scenario";
    for (const auto& d : diagnostics) {
        out += "\n  " + (d.path.empty() ? std::string("/") : d.path) + ": " + d.message;
    }
    return out;
}

}  // namespace

LoadError::LoadError(const std::string& source, std::vector<Diagnostic> diagnostics)
    : Error(describe(source, diagnostics)), diagnostics_(std::move(diagnostics))
{
}

}  // namespace ima
