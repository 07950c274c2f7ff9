#include <iostream>

#include "cli.hpp"
#include "genolm/error.hpp"

namespace {

CLI::App* deepest(CLI::App& root) {
  CLI::App* app = &root;
  for (;;) {
    const auto subs = app->get_subcommands();
    if (subs.empty()) return app;
    app = subs.front();
  }
}

int usage(CLI::App* app, const std::string& message) {
  std::cerr << "usage error: " << message << "\n\n" << app->help();
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace genolm::cli;
  CLI::App app{"genolm: genomic language-model toolkit"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", "genolm 0.1.0");

  Globals globals;
  app.add_option("--seed", globals.seed, "Seed for every random choice");
  app.add_option("--threads", globals.threads, "Worker threads (0 = GENOLM_THREADS, else all cores)");
  app.add_option("--config", globals.config, "File of key=value defaults; command-line flags take precedence");

  Registry registry;
  Context ctx{app, globals, registry};
  register_data_commands(ctx);
  register_model_commands(ctx);
  register_eval_commands(ctx);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return usage(deepest(app), e.what());
  }

  CLI::App* leaf = nullptr;
  const auto* body = registry.selected(&leaf);
  if (body == nullptr) return usage(deepest(app), "no command selected");
  try {
    if (!globals.config.empty()) apply_config_file(globals.config, app, leaf);
    (*body)();
  } catch (const UsageError& e) {
    return usage(leaf, e.what());
  } catch (const CLI::Error& e) {
    return usage(leaf, e.what());
  } catch (const genolm::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
