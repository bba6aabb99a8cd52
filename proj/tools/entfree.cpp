// entfree: run scenarios, the verification suite, and inspect presets.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "entfree/config.hpp"
#include "entfree/errors.hpp"
#include "entfree/presets.hpp"
#include "entfree/report.hpp"
#include "entfree/scenario.hpp"
#include "entfree/verify.hpp"

namespace {

enum Exit { kOk = 0, kChecksFailed = 1, kConfig = 2, kPrecondition = 3, kIo = 4 };

int finish(const entfree::RunReport& report) {
    std::cout << entfree::report_table(report);
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
    for (const auto& path : report.outputs) std::cout << "wrote " << path << "\n";
    return report.passed() ? kOk : kChecksFailed;
}

template <typename F>
int guarded(F&& body) {
    try {
        return body();
    } catch (const entfree::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const entfree::PreconditionError& e) {
        std::cerr << "precondition violated: " << e.what() << "\n";
        return kPrecondition;
    } catch (const entfree::IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kIo;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Entanglement-free evolution laboratory"};
    app.require_subcommand(1);

    std::string config_path;
    std::string preset;
    std::optional<std::string> output_dir;
    auto* run = app.add_subcommand("run", "Run a scenario config");
    run->add_option("config", config_path, "Scenario INI file");
    run->add_option("--preset", preset, "Run a bundled preset instead of a file");
    run->add_option("-o,--output-dir", output_dir, "Output directory (overrides $ENTFREE_OUTPUT_DIR)");

    std::string filter;
    auto* verify = app.add_subcommand("verify", "Run the verification suite");
    verify->add_option("--filter", filter, "Regular expression selecting check ids");
    verify->add_option("-o,--output-dir", output_dir, "Output directory (overrides $ENTFREE_OUTPUT_DIR)");
    bool list_only = false;
    verify->add_flag("--list", list_only, "List check ids and exit");

    auto* presets = app.add_subcommand("presets", "Bundled scenario configs");
    presets->require_subcommand(1);
    auto* list = presets->add_subcommand("list", "List preset names");
    std::string show_name;
    auto* show = presets->add_subcommand("show", "Print a preset config");
    show->add_option("name", show_name, "Preset name")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    if (*run) {
        return guarded([&] {
            if (config_path.empty() == preset.empty())
                throw entfree::ConfigError("give exactly one of a config file or --preset");
            entfree::ScenarioConfig cfg;
            if (!preset.empty()) {
                const auto text = entfree::preset_text(preset);
                if (!text) throw entfree::ConfigError("unknown preset '" + preset + "'");
                cfg = entfree::parse_config(*text, "preset " + preset);
            } else {
                cfg = entfree::load_config(config_path);
            }
            return finish(entfree::run_scenario(cfg, output_dir));
        });
    }

    if (*verify) {
        if (list_only) {
            for (const auto& c : entfree::verification_checks())
                std::printf("%-28s %2d  %s\n", c.id.c_str(), c.criterion, c.description.c_str());
            return kOk;
        }
        return guarded([&] {
            entfree::ScenarioConfig cfg;
            cfg.id = "verify";
            cfg.mode = entfree::Mode::verify;
            cfg.filter = filter;
            return finish(entfree::run_scenario(cfg, output_dir));
        });
    }

    if (*list) {
        for (const auto& name : entfree::preset_names()) std::cout << name << "\n";
        return kOk;
    }
    if (*show) {
        const auto text = entfree::preset_text(show_name);
        if (!text) {
            std::cerr << "unknown preset '" << show_name << "'\n";
            return kConfig;
        }
        std::cout << *text;
        return kOk;
    }
    return kOk;
}
