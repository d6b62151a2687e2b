#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cli/config.hpp"

namespace strobo::cli {

struct Options {
    std::string out;  // empty: stdout
    std::uint64_t seed = 1;
    bool check = false;
    unsigned threads = 1;  // 0: hardware concurrency
};

/// One output document. The first goes to --out; later ones go next to it
/// with the suffix inserted before the extension.
struct Output {
    std::string suffix;
    std::string content;
};

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct CommandResult {
    std::vector<Output> outputs;
    std::vector<CheckResult> checks;  // filled only with Options::check

    bool checks_pass() const;
};

CommandResult cmd_dephase_sweep(const Config& c, const Options& o);
CommandResult cmd_meas_sweep(const Config& c, const Options& o);
CommandResult cmd_eta(const Config& c, const Options& o);
CommandResult cmd_snr_curve(const Config& c, const Options& o);
CommandResult cmd_lifetime(const Config& c, const Options& o);
CommandResult cmd_histograms(const Config& c, const Options& o);

const std::vector<std::string>& command_names();
CommandResult run_command(const std::string& name, const Config& c, const Options& o);

/// sibling_path("out.csv", "_fits.json") == "out_fits.json".
std::string sibling_path(const std::string& out, const std::string& suffix);

/// Writes outputs (stdout when o.out is empty) and returns the process exit code:
/// 0 ok, 1 config error, 2 numerical failure, 3 check failure.
int run_main(int argc, char** argv);

}  // namespace strobo::cli
