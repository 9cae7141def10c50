#pragma once

// gen | solve | verify | sweep. Every command takes its settings as
// key → value text (the config-file keys, which are also the flag names) so
// the file format and the flags share one parser.

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "glmamp/problem_io.hpp"

namespace glmamp::cli {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kUsage = 2 };

class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct KeyHelp {
    const char* key;
    const char* help;
};

/// Recognised keys per command, in `--help` order.
const std::vector<KeyHelp>& gen_keys();
const std::vector<KeyHelp>& solve_keys();
const std::vector<KeyHelp>& verify_keys();
const std::vector<KeyHelp>& sweep_keys();

/// Overlays `flags` on the contents of `settings["config"]` (when present).
/// Unknown keys in either source are usage errors.
KeyValues merge_settings(const std::vector<KeyHelp>& keys, const KeyValues& flags);

/// Each returns an ExitCode; diagnostics go to `err`, one-line results to `out`.
int cmd_gen(const KeyValues& settings, std::ostream& out, std::ostream& err);
int cmd_solve(const KeyValues& settings, std::ostream& out, std::ostream& err);
int cmd_verify(const KeyValues& settings, std::ostream& out, std::ostream& err);
int cmd_sweep(const KeyValues& settings, std::ostream& out, std::ostream& err);

/// "a:step:b" (inclusive) or "v1,v2,…".
std::vector<double> parse_axis(const std::string& text);

}  // namespace glmamp::cli
