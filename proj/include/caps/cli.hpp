#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace caps::cli {

// Exit codes of run().
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kDataError = 2;
inline constexpr int kNumericalError = 3;

// args excludes the program name. Subcommands: synth, ingest, features, train,
// generate, evaluate, report. `--config FILE` injects `key = value` lines as
// flags ahead of the command line, so explicit flags win.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

// Parses `key = value` lines (blank lines and '#' comments skipped) into
// "--key=value" tokens. Throws std::invalid_argument on a malformed line.
std::vector<std::string> config_tokens(const std::string& text);

}  // namespace caps::cli
