// glmamp — gen | solve | verify | sweep
//
// Exit codes: 0 ok, 1 check failure or divergence, 2 usage or I/O error.
// Every flag is also a config-file key (`--config FILE`, key = value lines);
// flags given on the command line win.

#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "glmamp/kernels.hpp"
#include "glmamp/spec_parse.hpp"

namespace {

using glmamp::cli::KeyHelp;

struct Subcommand {
    CLI::App* app;
    const std::vector<KeyHelp>* keys;
    int (*run)(const glmamp::KeyValues&, std::ostream&, std::ostream&);
    std::map<std::string, std::string> values;
};

}  // namespace

int main(int argc, char** argv) {
    glmamp::kernels::configure_threads_from_env();

    CLI::App app{"GLM inference with sum-product / max-sum GAMP and its modular (EP) decomposition"};
    app.require_subcommand(1);
    app.footer("Environment: GLMAMP_THREADS caps the number of worker threads.");

    std::map<std::string, Subcommand> subs;
    const auto add = [&](const std::string& name, const std::string& about, const std::vector<KeyHelp>& keys,
                         int (*run)(const glmamp::KeyValues&, std::ostream&, std::ostream&)) {
        Subcommand& sub = subs[name];
        sub.app = app.add_subcommand(name, about);
        sub.keys = &keys;
        sub.run = run;
        for (const auto& k : keys) sub.app->add_option("--" + std::string(k.key), sub.values[k.key], k.help);
    };
    add("gen", "generate a problem instance (A, x*, y) from a seed", glmamp::cli::gen_keys(), glmamp::cli::cmd_gen);
    add("solve", "run the monolithic or modular engine; writes trace.jsonl, summary.json, x_hat.csv",
        glmamp::cli::solve_keys(), glmamp::cli::cmd_solve);
    add("verify", "run the verification checks; exit 0 iff all pass", glmamp::cli::verify_keys(),
        glmamp::cli::cmd_verify);
    add("sweep", "NMSE over SNR / rho / m/n cells; writes a CSV", glmamp::cli::sweep_keys(), glmamp::cli::cmd_sweep);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return glmamp::cli::kUsage;
    }

    for (auto& [name, sub] : subs) {
        if (!sub.app->parsed()) continue;
        glmamp::KeyValues flags;
        for (const auto& k : *sub.keys) {
            if (sub.app->get_option("--" + std::string(k.key))->count() > 0) flags[k.key] = sub.values[k.key];
        }
        try {
            return sub.run(glmamp::cli::merge_settings(*sub.keys, flags), std::cout, std::cerr);
        } catch (const glmamp::SpecParseError& e) {
            std::cerr << name << ": " << e.what() << '\n';
        } catch (const glmamp::cli::UsageError& e) {
            std::cerr << name << ": " << e.what() << '\n';
        } catch (const glmamp::IoError& e) {
            std::cerr << name << ": " << e.what() << '\n';
        } catch (const std::invalid_argument& e) {
            std::cerr << name << ": " << e.what() << '\n';
        } catch (const std::exception& e) {
            std::cerr << name << ": error: " << e.what() << '\n';
            return glmamp::cli::kCheckFailed;
        }
        return glmamp::cli::kUsage;
    }
    return glmamp::cli::kUsage;
}
