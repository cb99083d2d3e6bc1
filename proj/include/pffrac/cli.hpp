#pragma once

// Command-line driver: reads a run configuration, runs the load schedule and
// writes curve.csv plus periodic step_XXXX.vtk snapshots.
//
// Exit status: 0 on a completed run, 1 on a solver failure (partial outputs
// are kept), 2 on usage or configuration errors.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "config.hpp"
#include "output.hpp"
#include "solver.hpp"

namespace pffrac {

inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Fourth-order phase-field fracture with C0 interior-penalty elements"};
  std::string config_path;
  std::string output_dir = "./out";
  int stride = 5;
  bool quiet = false;
  app.add_option("--config", config_path, "run configuration file")->required();
  app.add_option("--output", output_dir, "output directory")->capture_default_str();
  app.add_option("--snapshot-stride", stride, "steps between VTK snapshots (0 disables)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  app.add_flag("--quiet", quiet, "suppress per-step progress");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n\n" << app.help();
    return 2;
  }

  RunConfig cfg;
  Mesh mesh;
  try {
    std::ifstream in(config_path);
    if (!in) {
      err << "cannot open config file '" << config_path << "'\n\n" << app.help();
      return 2;
    }
    std::stringstream text;
    text << in.rdbuf();
    cfg = parse_config(text.str());
    mesh = cfg.build_mesh(std::filesystem::path(config_path).parent_path().string());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  std::error_code ec;
  std::filesystem::create_directories(output_dir, ec);
  if (ec) {
    err << "error: cannot create output directory '" << output_dir << "': " << ec.message() << '\n';
    return 2;
  }
  const std::filesystem::path dir(output_dir);

  RunHistory hist;
  try {
    const FESpace space(std::move(mesh), cfg.p);
    StaggeredSolver solver(space, cfg.material(), cfg.penalty(), cfg.boundary, cfg.stagger);
    if (!quiet)
      out << "p = " << cfg.p << ", gamma = " << cfg.penalty_gamma() << ", elements = " << space.n_elements()
          << ", scalar dofs = " << space.n_dofs() << '\n';
    hist = solver.run(cfg.schedule, [&](const CurveRecord& r, const FieldState& state) {
      if (!quiet) {
        char line[200];
        std::snprintf(line, sizeof line, "step %3d  uy = %.6e  reaction = %.6e  max d = %.4f  iters = %2d%s\n", r.step,
                      r.applied_uy_mm, r.reaction_kN, r.max_d, r.stagger_iters, r.converged ? "" : "  (not converged)");
        out << line << std::flush;
      }
      if (stride > 0 && r.step % stride == 0) {
        char name[32];
        std::snprintf(name, sizeof name, "step_%04d.vtk", r.step);
        std::ofstream vtk(dir / name);
        write_vtk_snapshot(space, state, vtk);
      }
    });
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  if (!hist.records.empty()) {
    std::ofstream csv(dir / "curve.csv");
    write_curve_csv(hist.records, csv);
  }
  if (hist.aborted) {
    err << "solver failure at " << hist.diagnostic << '\n';
    return 1;
  }
  return 0;
}

}  // namespace pffrac
