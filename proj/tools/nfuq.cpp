#include "nfuq/cli.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

int main(int argc, char** argv) {
  CLI::App app{"Forward uncertainty quantification for neural field equations"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string formats;
  int workers = 0;
  std::vector<std::string> overrides;

  for (const char* name : {"solve", "uq", "converge", "mc-check", "spectrum"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "configuration file (TOML)");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--workers", workers, "worker thread count");
    sub->add_option("--set", overrides,
                    "override a config field, e.g. --set problem.alpha=-1");
    sub->add_option("--format", formats, "output formats, e.g. csv,svg");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    nfuq::toml::Document doc;
    if (!config_path.empty()) doc = nfuq::toml::parse_file(config_path);
    for (const auto& o : overrides) nfuq::toml::apply_override(doc, o);
    if (!out_dir.empty())
      nfuq::toml::apply_override(doc, "output.directory=\"" + out_dir + "\"");
    if (workers > 0)
      nfuq::toml::apply_override(doc,
                                 "execution.workers=" + std::to_string(workers));
    if (!formats.empty()) {
      std::string list = "[";
      std::string cur;
      for (char c : formats + ",") {
        if (c == ',') {
          if (!cur.empty()) {
            if (list.size() > 1) list += ", ";
            list += "\"" + cur + "\"";
            cur.clear();
          }
        } else {
          cur += c;
        }
      }
      nfuq::toml::apply_override(doc, "output.formats=" + list + "]");
    }
    nfuq::RunConfig cfg = nfuq::build_run_config(std::move(doc));
    return nfuq::run_command(command, cfg);
  } catch (const nfuq::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return nfuq::kExitConfig;
  } catch (const nfuq::toml::ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return nfuq::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return nfuq::kExitSolver;
  }
}
