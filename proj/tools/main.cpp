#include "commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"koopest: Koopman estimators with learned residual corrections"};
  app.require_subcommand(1);

  koopest::cli::Options opt;
  std::uint64_t seed = 0;
  std::string methods;
  const char* names[] = {"generate", "fit-edmd", "train", "evaluate", "transfer", "finetune"};
  for (const char* name : names) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", opt.config_path, "experiment config JSON")->required();
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--out", opt.out_dir, "output directory");
    if (std::string(name) == "evaluate") {
      sub->add_option("--methods", methods, "comma-separated subset of hybrid,edmd,rl");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << nlohmann::json{{"error", {{"kind", "usage"}, {"message", e.what()}}}}.dump() << "\n";
    return 2;
  }

  CLI::App* chosen = app.get_subcommands().front();
  if (chosen->count("--seed") > 0) opt.seed = seed;
  if (!methods.empty()) {
    opt.methods.clear();
    std::size_t start = 0;
    while (start <= methods.size()) {
      const std::size_t comma = methods.find(',', start);
      const std::string item = methods.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      if (!item.empty()) opt.methods.push_back(item);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  return koopest::cli::run(chosen->get_name(), opt);
}
