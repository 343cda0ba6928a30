#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "namo/errors.hpp"
#include "namo/harness.hpp"

namespace fs = std::filesystem;
using namespace namo;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kInputError = 2;

struct Options {
  std::string scene;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool svg = false;
  int svg_stride = 1;
  std::optional<int> max_replans;
  std::string report = "text";
  int repeat = 1;
};

harness::SceneSpec load(const Options& o) {
  harness::SceneSpec s = harness::load_scene(o.scene);
  if (o.seed) s.seed = *o.seed;
  if (o.max_replans) {
    s.planner.max_replans = *o.max_replans;
    harness::validate(s);
  }
  return s;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  f << text;
  if (!f) throw IoError("cannot write " + path.string());
}

fs::path out_dir(const Options& o) {
  const fs::path dir = o.out.empty() ? fs::path("namo_out") : fs::path(o.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

int cmd_plan(const Options& o) {
  const harness::SceneSpec s = load(o);
  nav::GridPath path;
  try {
    path = harness::plan_global(s);
  } catch (const NoPath& e) {
    std::cerr << "NoPath: " << e.what() << "\n";
    return kFailed;
  }
  std::printf("waypoints %zu cost %.4f\n", path.size(), path.cost);
  if (!o.out.empty()) {
    std::string text;
    for (const Vec2& p : path.points) text += std::to_string(p.x) + " " + std::to_string(p.y) + "\n";
    write_file(out_dir(o) / "path.txt", text);
  }
  return kOk;
}

int cmd_run(const Options& o) {
  const harness::SceneSpec base = load(o);
  std::vector<harness::RunReport> runs;
  for (int i = 0; i < o.repeat; ++i) runs.push_back(harness::run(base));
  const auto format = o.report == "records" ? harness::ReportFormat::Records : harness::ReportFormat::Text;
  const std::string report = harness::emit_report(runs, format);
  std::cout << report;
  for (const harness::RunReport& r : runs) {
    if (!r.success) std::cerr << "run failed: " << r.nav.failure << "\n";
  }
  if (!o.out.empty() || o.svg) {
    const fs::path dir = out_dir(o);
    write_file(dir / (format == harness::ReportFormat::Records ? "report.txt" : "report_table.txt"), report);
    write_file(dir / "events.txt", harness::event_records(runs.back().nav));
    if (o.svg && !runs.back().nav.frames.empty()) {
      const auto files = harness::emit_svg(base, runs.back().nav, dir / "frames", o.svg_stride);
      std::cerr << "wrote " << files.size() << " svg frames to " << (dir / "frames").string() << "\n";
    }
  }
  for (const harness::RunReport& r : runs) {
    if (!r.success) return kFailed;
  }
  return kOk;
}

int cmd_cito(const Options& o) {
  const harness::SceneSpec s = load(o);
  const harness::CitoRun r = harness::solve_cito(s);
  std::printf("converged %d iterations %d cost %.6g seconds %.3f\n", r.solution.converged ? 1 : 0,
              r.solution.iterations, r.solution.cost, r.seconds);
  std::printf("sum_k first %.6g final %.6g\n", r.solution.first_accepted_sum_k, r.solution.final_sum_k);
  const Pose2 end = r.executed.back().robot;
  std::printf("executed robot %.4f %.4f %.4f goal_error %.4f\n", end.x, end.y, end.theta, r.goal_error);
  if (!o.out.empty()) {
    std::string text;
    for (std::size_t i = 0; i < r.solution.U.size(); ++i) {
      const auto& u = r.solution.U[i];
      text += std::to_string(i) + " " + std::to_string(u.base.vx) + " " + std::to_string(u.base.vy) + " " +
              std::to_string(u.base.omega) + "\n";
    }
    write_file(out_dir(o) / "controls.txt", text);
  }
  return r.solution.converged && r.goal_error <= s.cito.goal_tolerance ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Navigation among movable obstacles"};
  app.require_subcommand(1);
  Options o;

  const auto common = [&o](CLI::App* sub) {
    sub->add_option("--scene", o.scene, "Scene file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "Override the scene seed");
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--max-replans", o.max_replans, "Override the replan bound")->check(CLI::NonNegativeNumber);
  };
  CLI::App* plan = app.add_subcommand("plan", "Global path on the static map");
  common(plan);
  CLI::App* run = app.add_subcommand("run", "Full navigation run");
  common(run);
  run->add_flag("--svg", o.svg, "Write SVG frames under <out>/frames");
  run->add_option("--svg-stride", o.svg_stride, "Render every n-th frame")->check(CLI::PositiveNumber);
  run->add_option("--report", o.report, "Report format")->check(CLI::IsMember({"text", "records"}));
  run->add_option("--repeat", o.repeat, "Number of repeated runs")->check(CLI::PositiveNumber);
  CLI::App* cito = app.add_subcommand("cito", "Solve the scene's pushing problem");
  common(cito);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*plan) return cmd_plan(o);
    if (*run) return cmd_run(o);
    return cmd_cito(o);
  } catch (const ParseError& e) {
    std::cerr << o.scene << ":" << e.what() << "\n";
    return kInputError;
  } catch (const ValidationError& e) {
    std::cerr << "invalid scene: " << e.what() << "\n";
    return kInputError;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kInputError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailed;
  }
}
