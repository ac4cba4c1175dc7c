// smelab: weak-error experiments for SGD and its stochastic modified equation.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "smelab/errors.hpp"

namespace {

unsigned thread_count(std::optional<unsigned> flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("SMELAB_THREADS")) {
    try {
      return unsigned(std::stoul(env));
    } catch (const std::exception&) {
      throw smelab::ConfigError(std::string("SMELAB_THREADS: invalid value '") + env + "'");
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace smelab;

  CLI::App app{"Simulate SGD and its SME Euler-Maruyama proxy and measure weak errors"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<unsigned> threads;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> outdir;
  std::vector<double> snapshots;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Experiment configuration (INI)")->required()->check(CLI::ExistingFile);
    sub->add_option("--threads", threads, "Worker threads (default: SMELAB_THREADS or all cores)");
    sub->add_option("--seed", seed, "Base seed (overrides mc.base_seed)");
    sub->add_option("--out", outdir, "Output directory (overrides output.directory)");
  };

  auto* weak = app.add_subcommand("weak-error", "SGD vs SME-EM weak error over the step-size grid");
  add_common(weak);
  auto* exact = app.add_subcommand("sgd-vs-exact", "SGD vs the exact SME expectation (quadratic problem)");
  add_common(exact);
  auto* mc = app.add_subcommand("mc-convergence", "Monte Carlo error of SME-EM against the exact SME value vs trials");
  add_common(mc);
  auto* recon = app.add_subcommand("reconstruct", "One SGD and one SME-EM trajectory with field snapshots");
  add_common(recon);
  recon->add_option("--snapshots", snapshots, "Snapshot times (overrides dynamics.snapshots)")->delimiter(',');

  std::string image;
  int points = 0;
  int modes = 0;
  std::string image_out = ".";
  std::string prefix = "image";
  auto* proj = app.add_subcommand("project-image", "Resample a PGM image and project it onto the sine basis");
  proj->add_option("--image", image, "Binary PGM/PPM file")->required();
  proj->add_option("--n", points, "Grid points per axis")->required()->check(CLI::PositiveNumber);
  proj->add_option("--modes", modes, "Modes per axis K")->required()->check(CLI::PositiveNumber);
  proj->add_option("--out", image_out, "Output directory");
  proj->add_option("--prefix", prefix, "Output file prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kExitUsage;
  }

  try {
    if (proj->parsed()) return cli::cmd_project_image(image, points, modes, image_out, prefix, std::cout);

    cli::Context ctx;
    ctx.cfg = load_config(config_path);
    if (seed) ctx.cfg.base_seed = *seed;
    if (outdir) ctx.cfg.directory = *outdir;
    if (!snapshots.empty()) ctx.cfg.snapshots = snapshots;
    ctx.parallel.threads = thread_count(threads);
    ctx.log = &std::cout;

    if (weak->parsed()) return cli::cmd_weak_error(ctx);
    if (exact->parsed()) return cli::cmd_sgd_vs_exact(ctx);
    if (mc->parsed()) return cli::cmd_mc_convergence(ctx);
    return cli::cmd_reconstruct(ctx);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return cli::kExitUsage;
  } catch (const UnsupportedOperation& e) {
    std::cerr << "unsupported: " << e.what() << "\n";
    return cli::kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return cli::kExitUsage;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return cli::kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return cli::kExitUsage;
  }
}
