#include <CLI11.hpp>

#include <string>

#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"LiDAR-camera extrinsic calibration toolkit"};
  app.require_subcommand(1);
  calib::cli::configure_logging();

  calib::cli::CommandOptions opt;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  const char* names[] = {"simulate", "calibrate-3d3d", "calibrate-2d3d", "chain", "fuse"};
  const char* help[] = {
      "Simulate LiDAR scans and tag observations of a board scene",
      "Estimate the extrinsics from 3D-3D corner correspondences over one or more scans",
      "Estimate the extrinsics from 2D-3D correspondences with PnP",
      "Chain two LiDAR-to-camera calibrations into a camera-to-camera transform",
      "Merge two clouds with a transform and report the overlap quality",
  };
  std::vector<CLI::App*> subs;
  std::vector<CLI::Option*> seed_opts;
  for (int i = 0; i < 5; ++i) {
    CLI::App* sub = app.add_subcommand(names[i], help[i]);
    sub->add_option("--config", opt.config, "JSON config file")->required()->check(CLI::ExistingFile);
    seed_opts.push_back(sub->add_option("--seed", seed, "Override the config's random seed"));
    sub->add_option("--out", out_dir, "Output directory")->capture_default_str();
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help and version requests exit 0; every usage error is an input error.
    return app.exit(e) == 0 ? 0 : 1;
  }

  for (int i = 0; i < 5; ++i) {
    if (!subs[i]->parsed()) continue;
    if (seed_opts[i]->count() > 0) opt.seed = seed;
    opt.out_dir = out_dir;
    return calib::cli::run_command(names[i], opt);
  }
  return 1;
}
