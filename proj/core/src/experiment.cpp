#include "rosyn/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

#include "json_detail.hpp"
#include "rosyn/serialize.hpp"
#include "rosyn/simulate.hpp"

namespace rosyn {

using nlohmann::json;
namespace fs = std::filesystem;

LtvSystem PlantConfig::build(int horizon) const {
  if (demo) return spring_damper_demo_plant(horizon, demo_params);
  if (!explicit_plant) throw std::invalid_argument("no plant configured");
  if (explicit_plant->horizon != horizon) {
    throw std::invalid_argument(
        "explicit plant horizon " + std::to_string(explicit_plant->horizon) +
        " does not match requested horizon " + std::to_string(horizon));
  }
  return *explicit_plant;
}

namespace {

SynthesisStrategy strategy_from_string(const std::string& s) {
  if (s == "fixed_lambda_irm") return SynthesisStrategy::FixedLambdaIRM;
  if (s == "shor_plus_eval") return SynthesisStrategy::ShorPlusEval;
  if (s == "hinf") return SynthesisStrategy::Hinf;
  throw std::invalid_argument("unknown strategy '" + s + "'");
}

std::vector<Eigen::MatrixXd> matrix_list(const json& j, const char* name,
                                         size_t expected) {
  if (!j.is_array() || j.size() != expected) {
    throw std::invalid_argument(std::string(name) + " must list " +
                                std::to_string(expected) + " matrices");
  }
  std::vector<Eigen::MatrixXd> out;
  for (const auto& m : j) out.push_back(detail::matrix_from_json(m));
  return out;
}

PlantConfig plant_from_json(const json& j) {
  PlantConfig p;
  if (j.contains("demo_spring_damper")) {
    const json& d = j.at("demo_spring_damper");
    p.demo = true;
    auto get = [&](const char* k, double dflt) {
      return d.contains(k) ? d.at(k).get<double>() : dflt;
    };
    p.demo_params.m1 = get("m1", p.demo_params.m1);
    p.demo_params.m2 = get("m2", p.demo_params.m2);
    p.demo_params.k1 = get("k1", p.demo_params.k1);
    p.demo_params.k2 = get("k2", p.demo_params.k2);
    p.demo_params.b1 = get("b1", p.demo_params.b1);
    p.demo_params.b2 = get("b2", p.demo_params.b2);
    p.demo_params.ts = get("ts", p.demo_params.ts);
    p.demo_params.dya = get("dya", p.demo_params.dya);
    return p;
  }
  if (j.contains("explicit")) {
    const json& e = j.at("explicit");
    p.demo = false;
    LtvSystem sys;
    sys.horizon = e.at("horizon").get<int>();
    const size_t T = static_cast<size_t>(sys.horizon);
    sys.A = matrix_list(e.at("A"), "A", T);
    sys.Bu = matrix_list(e.at("Bu"), "Bu", T);
    sys.Ba = matrix_list(e.at("Ba"), "Ba", T);
    sys.Cy = matrix_list(e.at("Cy"), "Cy", T + 1);
    sys.Cz = matrix_list(e.at("Cz"), "Cz", T + 1);
    sys.Dya = matrix_list(e.at("Dya"), "Dya", T + 1);
    sys.Dzu = matrix_list(e.at("Dzu"), "Dzu", T + 1);
    sys.nx = static_cast<int>(sys.A.front().rows());
    sys.nu = static_cast<int>(sys.Bu.front().cols());
    sys.na = static_cast<int>(sys.Ba.front().cols());
    sys.ny = static_cast<int>(sys.Cy.front().rows());
    sys.nz = static_cast<int>(sys.Cz.front().rows());
    sys.validate();
    p.explicit_plant = std::move(sys);
    return p;
  }
  throw std::invalid_argument(
      "plant must contain 'demo_spring_damper' or 'explicit'");
}

void parse_search(const json& j, SynthesisOptions& opts) {
  auto geti = [&](const char* k, int& dst) {
    if (j.contains(k)) dst = j.at(k).get<int>();
  };
  auto getd = [&](const char* k, double& dst) {
    if (j.contains(k)) dst = j.at(k).get<double>();
  };
  geti("grid_points", opts.grid_points);
  geti("bisect_steps", opts.bisect_steps);
  getd("lambda_rel_tol", opts.lambda_rel_tol);
  geti("max_irm_iters", opts.max_irm_iters);
  geti("trial_irm_iters", opts.trial_irm_iters);
  getd("tol_rank", opts.tol_rank);
  getd("lambda_min", opts.lambda_min);
  geti("full_lifting_max_support", opts.full_lifting_max_support);
  geti("threads", opts.threads);
  if (j.contains("lifting")) {
    const std::string mode = j.at("lifting").get<std::string>();
    if (mode == "auto") opts.lifting = LiftingMode::Auto;
    else if (mode == "full") opts.lifting = LiftingMode::Full;
    else if (mode == "row_strata") opts.lifting = LiftingMode::RowStrata;
    else throw std::invalid_argument("unknown lifting mode '" + mode + "'");
  }
  if (j.contains("sdp")) {
    const json& s = j.at("sdp");
    if (s.contains("max_iter")) opts.sdp.max_iter = s.at("max_iter").get<int>();
    if (s.contains("tol_gap")) opts.sdp.tol_gap = s.at("tol_gap").get<double>();
    if (s.contains("tol_feas"))
      opts.sdp.tol_feas = s.at("tol_feas").get<double>();
  }
  if (opts.grid_points < 1 || opts.bisect_steps < 0 ||
      opts.max_irm_iters < 1 || opts.trial_irm_iters < 1) {
    throw std::invalid_argument("search options out of range");
  }
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

fs::path resolve_output_dir(const ExperimentConfig& config) {
  const char* env = std::getenv("ROSYN_OUTPUT_DIR");
  fs::path dir = env && *env ? fs::path(env) : fs::path(config.output_dir);
  fs::create_directories(dir);
  return dir;
}

struct RunOutcome {
  SynthesisResult result;
  double wallclock_s = 0.0;
};

std::optional<SlsMask> build_mask(const ExperimentConfig& config,
                                  const LtvSystem& plant) {
  if (!config.topology) return std::nullopt;
  const auto& t = *config.topology;
  return SlsMask::causal_with_topology(lift(plant), t.adjacency,
                                       t.node_of_state, t.node_of_input,
                                       t.node_of_output);
}

RunOutcome run_strategy(const ExperimentConfig& config, int horizon,
                        SynthesisStrategy strategy, int threads) {
  SynthesisOptions opts = config.search;
  opts.threads = threads;
  const LtvSystem plant = config.plant.build(horizon);
  const StealthSpec spec(config.alpha);
  const auto start = std::chrono::steady_clock::now();
  RunOutcome out;
  out.result = synthesize(plant, spec, strategy, build_mask(config, plant), opts);
  out.wallclock_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return out;
}

json controller_document(const ExperimentConfig& config, int horizon,
                         const SynthesisResult& r) {
  const LtvSystem plant = config.plant.build(horizon);
  json j;
  j["kind"] = "controller";
  j["seed"] = config.seed;
  j["alpha"] = config.alpha;
  j["horizon"] = horizon;
  j["strategy"] = to_string(r.strategy);
  j["dims"] = {{"nx", plant.nx}, {"nu", plant.nu}, {"na", plant.na},
               {"ny", plant.ny}, {"nz", plant.nz}};
  j["lambda"] = r.lambda;
  j["mu_bar"] = r.mu_bar;
  j["shor_lower_bound"] = r.shor_lower_bound;
  j["rank_converged"] = r.rank_converged;
  j["omega"] = json::parse(to_json(r.omega));
  j["gain"] = detail::matrix_to_json(r.gain);
  return j;
}

std::string file_tag(SynthesisStrategy s, int horizon) {
  return std::string(to_string(s)) + "_T" + std::to_string(horizon);
}

RunStatus write_error(const fs::path& dir, RunStatus status,
                      const std::string& message) {
  json j;
  j["error"] = message;
  j["exit_code"] = static_cast<int>(status);
  write_file(dir / "error.json", j.dump(2) + "\n");
  return status;
}

// --- Minimal deterministic SVG 1.1 line/bar plots. -----------------------

std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#9467bd", "#ff7f0e", "#8c564b"};

class SvgCanvas {
 public:
  SvgCanvas(double xmin, double xmax, double ymin, double ymax)
      : xmin_(xmin), xmax_(xmax), ymin_(ymin), ymax_(ymax) {
    if (xmax_ <= xmin_) xmax_ = xmin_ + 1;
    if (ymax_ <= ymin_) ymax_ = ymin_ + 1;
  }

  void polyline(const std::vector<double>& xs, const std::vector<double>& ys,
                const std::string& color, bool dashed = false) {
    body_ += "<polyline fill=\"none\" stroke=\"" + color +
             "\" stroke-width=\"1.5\"";
    if (dashed) body_ += " stroke-dasharray=\"6 4\"";
    body_ += " points=\"";
    for (size_t i = 0; i < xs.size(); ++i) {
      body_ += fmt6(px(xs[i])) + "," + fmt6(py(ys[i])) + " ";
    }
    body_ += "\"/>\n";
  }

  void hline(double y, const std::string& color) {
    polyline({xmin_, xmax_}, {y, y}, color, true);
  }

  void bar(double xc, double half_width, double y, const std::string& color) {
    const double x0 = px(xc - half_width), x1 = px(xc + half_width);
    const double y0 = py(std::max(0.0, ymin_)), y1 = py(y);
    body_ += "<rect x=\"" + fmt6(x0) + "\" y=\"" + fmt6(std::min(y0, y1)) +
             "\" width=\"" + fmt6(x1 - x0) + "\" height=\"" +
             fmt6(std::abs(y0 - y1)) + "\" fill=\"" + color + "\"/>\n";
  }

  void legend(const std::vector<std::pair<std::string, std::string>>& items) {
    double y = mt_ + 14;
    for (const auto& [label, color] : items) {
      body_ += "<rect x=\"" + fmt6(W_ - mr_ - 150) + "\" y=\"" +
               fmt6(y - 9) + "\" width=\"12\" height=\"12\" fill=\"" + color +
               "\"/>\n";
      body_ += "<text x=\"" + fmt6(W_ - mr_ - 132) + "\" y=\"" + fmt6(y + 2) +
               "\" font-size=\"12\">" + label + "</text>\n";
      y += 18;
    }
  }

  std::string render(const std::string& title, const std::string& xlabel,
                     const std::string& ylabel) const {
    std::string svg =
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" "
        "width=\"" +
        fmt6(W_) + "\" height=\"" + fmt6(H_) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    // axes
    svg += "<line x1=\"" + fmt6(ml_) + "\" y1=\"" + fmt6(H_ - mb_) +
           "\" x2=\"" + fmt6(W_ - mr_) + "\" y2=\"" + fmt6(H_ - mb_) +
           "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + fmt6(ml_) + "\" y1=\"" + fmt6(mt_) + "\" x2=\"" +
           fmt6(ml_) + "\" y2=\"" + fmt6(H_ - mb_) + "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
      const double fx = xmin_ + (xmax_ - xmin_) * t / 4.0;
      const double fy = ymin_ + (ymax_ - ymin_) * t / 4.0;
      svg += "<text x=\"" + fmt6(px(fx)) + "\" y=\"" + fmt6(H_ - mb_ + 16) +
             "\" font-size=\"11\" text-anchor=\"middle\">" + fmt6(fx) +
             "</text>\n";
      svg += "<text x=\"" + fmt6(ml_ - 6) + "\" y=\"" + fmt6(py(fy) + 4) +
             "\" font-size=\"11\" text-anchor=\"end\">" + fmt6(fy) +
             "</text>\n";
    }
    svg += "<text x=\"" + fmt6((ml_ + W_ - mr_) / 2) + "\" y=\"" +
           fmt6(H_ - 12) + "\" font-size=\"12\" text-anchor=\"middle\">" +
           xlabel + "</text>\n";
    svg += "<text x=\"16\" y=\"" + fmt6((mt_ + H_ - mb_) / 2) +
           "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 "
           "16 " +
           fmt6((mt_ + H_ - mb_) / 2) + ")\">" + ylabel + "</text>\n";
    svg += "<text x=\"" + fmt6(W_ / 2) + "\" y=\"18\" font-size=\"14\" "
           "text-anchor=\"middle\">" +
           title + "</text>\n";
    svg += body_;
    svg += "</svg>\n";
    return svg;
  }

 private:
  double px(double x) const {
    return ml_ + (x - xmin_) / (xmax_ - xmin_) * (W_ - ml_ - mr_);
  }
  double py(double y) const {
    return H_ - mb_ - (y - ymin_) / (ymax_ - ymin_) * (H_ - mt_ - mb_);
  }
  double W_ = 640, H_ = 420, ml_ = 70, mr_ = 20, mt_ = 30, mb_ = 50;
  double xmin_, xmax_, ymin_, ymax_;
  std::string body_;
};

struct AttackRun {
  Trajectory traj;
  std::vector<double> cumulative_stealth;  // vs the at-rest nominal
};

// Applies the certified worst-case attack to the closed loop. The
// disturbance vector carries the adversarial initial state in its first
// block; the stealth trace is measured against the at-rest nominal run.
AttackRun apply_attack(const LtvSystem& plant, const Eigen::MatrixXd& gain,
                       const Eigen::VectorXd& attack) {
  const auto [x0, a] = split_attack(attack, plant.nx, plant.na, plant.horizon);
  AttackRun run;
  run.traj = simulate_closed_loop(plant, gain, x0, a);
  double acc = 0.0;
  for (int k = 0; k <= plant.horizon; ++k) {
    acc += run.traj.y.row(k).squaredNorm();
    run.cumulative_stealth.push_back(acc);
  }
  return run;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config parse error: ") +
                                e.what());
  }
  ExperimentConfig c;
  if (!j.contains("seed")) {
    throw std::invalid_argument("config requires a seed");
  }
  c.seed = j.at("seed").get<std::uint64_t>();
  c.alpha = j.value("alpha", 0.1);
  if (!j.contains("horizons") || !j.at("horizons").is_array() ||
      j.at("horizons").empty()) {
    throw std::invalid_argument("config requires a non-empty horizons list");
  }
  for (const auto& h : j.at("horizons")) {
    const int T = h.get<int>();
    if (T < 1) throw std::invalid_argument("horizons must be >= 1");
    c.horizons.push_back(T);
  }
  if (!j.contains("strategies") || !j.at("strategies").is_array() ||
      j.at("strategies").empty()) {
    throw std::invalid_argument("config requires a non-empty strategies list");
  }
  for (const auto& s : j.at("strategies")) {
    c.strategies.push_back(strategy_from_string(s.get<std::string>()));
  }
  if (!j.contains("plant")) throw std::invalid_argument("config needs plant");
  c.plant = plant_from_json(j.at("plant"));
  if (j.contains("search")) parse_search(j.at("search"), c.search);
  if (j.contains("topology")) {
    const json& t = j.at("topology");
    TopologyConfig topo;
    const Eigen::MatrixXd adj = detail::matrix_from_json(t.at("adjacency"));
    topo.adjacency = adj.array() != 0.0;
    auto vec_int = [](const json& arr) {
      Eigen::VectorXi v(arr.size());
      for (size_t i = 0; i < arr.size(); ++i) v(i) = arr[i].get<int>();
      return v;
    };
    topo.node_of_state = vec_int(t.at("node_of_state"));
    topo.node_of_input = vec_int(t.at("node_of_input"));
    topo.node_of_output = vec_int(t.at("node_of_output"));
    c.topology = std::move(topo);
  }
  c.output_dir = j.value("output_dir", std::string("out"));
  c.timing = j.value("timing", false);
  if (!(c.alpha > 0)) throw std::invalid_argument("alpha must be positive");
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

RunStatus cmd_synthesize(const ExperimentConfig& config) {
  const fs::path dir = resolve_output_dir(config);
  try {
    std::string summary = summary_csv_header() + "\n";
    bool first = true;
    for (int horizon : config.horizons) {
      for (SynthesisStrategy strategy : config.strategies) {
        const RunOutcome run =
            run_strategy(config, horizon, strategy, config.search.threads);
        if (run.result.certificate.status == RegretStatus::SolverFailure) {
          return write_error(dir, RunStatus::SolverFailure,
                             "certificate solve failed for " +
                                 file_tag(strategy, horizon));
        }
        const double wallclock = config.timing ? run.wallclock_s : 0.0;
        summary +=
            summary_csv_row(run.result, horizon, config.alpha, wallclock) +
            "\n";
        const json doc = controller_document(config, horizon, run.result);
        const std::string tag = file_tag(strategy, horizon);
        write_file(dir / ("controller_" + tag + ".json"), doc.dump(2) + "\n");
        write_file(dir / ("certificate_" + tag + ".json"),
                   to_json(run.result.certificate) + "\n");
        write_file(dir / ("synthesis_" + tag + ".json"),
                   to_json(run.result) + "\n");
        if (first) {
          write_file(dir / "controller.json", doc.dump(2) + "\n");
          write_file(dir / "certificate.json",
                     to_json(run.result.certificate) + "\n");
          first = false;
        }
      }
    }
    write_file(dir / "summary.csv", summary);
    return RunStatus::Ok;
  } catch (const InfeasibleProblem& e) {
    return write_error(dir, RunStatus::Infeasible, e.what());
  } catch (const std::invalid_argument& e) {
    return write_error(dir, RunStatus::ConfigError, e.what());
  } catch (const std::exception& e) {
    return write_error(dir, RunStatus::SolverFailure, e.what());
  }
}

RunStatus cmd_compare(const ExperimentConfig& config) {
  const fs::path dir = resolve_output_dir(config);
  try {
    if (config.strategies.size() < 2) {
      throw std::invalid_argument("compare needs at least two strategies");
    }
    const bool has_hinf =
        std::count(config.strategies.begin(), config.strategies.end(),
                   SynthesisStrategy::Hinf) > 0;
    if (!has_hinf) {
      throw std::invalid_argument(
          "compare needs the hinf baseline in strategies");
    }

    // Horizon x strategy grid, outer-parallel with single-threaded inner
    // searches; results merged in configuration order.
    struct Cell {
      RunOutcome run;
    };
    const size_t n_h = config.horizons.size();
    const size_t n_s = config.strategies.size();
    std::vector<Cell> cells(n_h * n_s);
    const int workers = std::max(
        1, config.search.threads > 0
               ? config.search.threads
               : static_cast<int>(std::thread::hardware_concurrency()));
    std::vector<size_t> order(n_h * n_s);
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (size_t base = 0; base < order.size();
         base += static_cast<size_t>(workers)) {
      std::vector<std::future<Cell>> futs;
      for (size_t k = base;
           k < std::min(order.size(), base + static_cast<size_t>(workers));
           ++k) {
        const int horizon = config.horizons[k / n_s];
        const SynthesisStrategy strategy = config.strategies[k % n_s];
        futs.push_back(std::async(std::launch::async, [&, horizon, strategy] {
          return Cell{run_strategy(config, horizon, strategy, 1)};
        }));
      }
      for (size_t j = 0; j < futs.size(); ++j) {
        cells[base + j] = futs[j].get();
      }
    }

    auto mu_of = [&](size_t h, size_t s) {
      const auto& cert = cells[h * n_s + s].run.result.certificate;
      if (cert.status != RegretStatus::Optimal) {
        throw std::runtime_error("certificate not optimal in comparison");
      }
      return cert.mu_star;
    };

    // Every number in the table stays recomputable from emitted artifacts.
    for (size_t h = 0; h < n_h; ++h) {
      for (size_t s = 0; s < n_s; ++s) {
        const auto& r = cells[h * n_s + s].run.result;
        const int horizon = config.horizons[h];
        const json doc = controller_document(config, horizon, r);
        const std::string tag = file_tag(config.strategies[s], horizon);
        write_file(dir / ("controller_" + tag + ".json"), doc.dump(2) + "\n");
      }
    }

    // comparison.csv: one row per controller, then the improvement factor.
    std::string csv = "controller";
    for (int h : config.horizons) csv += ",T=" + std::to_string(h);
    csv += "\n";
    for (size_t s = 0; s < n_s; ++s) {
      csv += to_string(config.strategies[s]);
      for (size_t h = 0; h < n_h; ++h) {
        csv += "," + format_csv_double(mu_of(h, s));
      }
      csv += "\n";
    }
    csv += "improvement_factor";
    for (size_t h = 0; h < n_h; ++h) {
      double hinf_mu = 0.0, best_prop = std::numeric_limits<double>::infinity();
      for (size_t s = 0; s < n_s; ++s) {
        if (config.strategies[s] == SynthesisStrategy::Hinf) {
          hinf_mu = mu_of(h, s);
        } else {
          best_prop = std::min(best_prop, mu_of(h, s));
        }
      }
      csv += "," + format_csv_double(hinf_mu / best_prop);
    }
    csv += "\n";
    write_file(dir / "comparison.csv", csv);

    // Plots and CSV backing at the largest horizon.
    size_t h_star = 0;
    for (size_t h = 0; h < n_h; ++h) {
      if (config.horizons[h] > config.horizons[h_star]) h_star = h;
    }
    const int T = config.horizons[h_star];
    const LtvSystem plant = config.plant.build(T);
    std::vector<AttackRun> runs;
    for (size_t s = 0; s < n_s; ++s) {
      const auto& r = cells[h_star * n_s + s].run.result;
      runs.push_back(apply_attack(plant, r.gain, r.certificate.attack));
    }

    // stealth_trajectory.csv + stealth.svg
    {
      std::string sc = "k";
      for (size_t s = 0; s < n_s; ++s) {
        sc += "," + std::string(to_string(config.strategies[s]));
      }
      sc += "\n";
      double ymax = config.alpha;
      for (int k = 0; k <= T; ++k) {
        sc += std::to_string(k);
        for (size_t s = 0; s < n_s; ++s) {
          sc += "," + format_csv_double(runs[s].cumulative_stealth[k]);
          ymax = std::max(ymax, runs[s].cumulative_stealth[k]);
        }
        sc += "\n";
      }
      write_file(dir / "stealth_trajectory.csv", sc);

      SvgCanvas canvas(0, T, 0, 1.1 * ymax);
      std::vector<std::pair<std::string, std::string>> legend;
      for (size_t s = 0; s < n_s; ++s) {
        std::vector<double> xs, ys;
        for (int k = 0; k <= T; ++k) {
          xs.push_back(k);
          ys.push_back(runs[s].cumulative_stealth[k]);
        }
        canvas.polyline(xs, ys, kPalette[s % 6]);
        legend.emplace_back(to_string(config.strategies[s]), kPalette[s % 6]);
      }
      canvas.hline(config.alpha, "#444444");
      legend.emplace_back("budget alpha", "#444444");
      canvas.legend(legend);
      write_file(dir / "stealth.svg",
                 canvas.render("Cumulative squared output deviation", "step",
                               "|y - y_n|^2 (cumulative)"));
    }

    // regret_bars.svg
    {
      double ymax = 0.0;
      for (size_t s = 0; s < n_s; ++s) ymax = std::max(ymax, mu_of(h_star, s));
      SvgCanvas canvas(-0.5, static_cast<double>(n_s) - 0.5, 0, 1.1 * ymax);
      std::vector<std::pair<std::string, std::string>> legend;
      for (size_t s = 0; s < n_s; ++s) {
        canvas.bar(static_cast<double>(s), 0.3, mu_of(h_star, s),
                   kPalette[s % 6]);
        legend.emplace_back(to_string(config.strategies[s]), kPalette[s % 6]);
      }
      canvas.legend(legend);
      write_file(dir / "regret_bars.svg",
                 canvas.render("Worst-case regret under stealthy attacks",
                               "controller", "certified regret"));
    }

    // regulated_output.csv + regulated_output.svg
    {
      std::string rc = "k";
      for (size_t s = 0; s < n_s; ++s) {
        for (int c = 0; c < plant.nz; ++c) {
          rc += "," + std::string(to_string(config.strategies[s])) + "_z" +
                std::to_string(c);
        }
      }
      rc += "\n";
      double zmax = 1e-9;
      for (int k = 0; k <= T; ++k) {
        rc += std::to_string(k);
        for (size_t s = 0; s < n_s; ++s) {
          for (int c = 0; c < plant.nz; ++c) {
            rc += "," + format_csv_double(runs[s].traj.z(k, c));
            zmax = std::max(zmax, std::abs(runs[s].traj.z(k, c)));
          }
        }
        rc += "\n";
      }
      write_file(dir / "regulated_output.csv", rc);

      SvgCanvas canvas(0, T, -1.1 * zmax, 1.1 * zmax);
      std::vector<std::pair<std::string, std::string>> legend;
      for (size_t s = 0; s < n_s; ++s) {
        std::vector<double> xs, ys;
        for (int k = 0; k <= T; ++k) {
          xs.push_back(k);
          ys.push_back(runs[s].traj.z(k, 0));
        }
        canvas.polyline(xs, ys, kPalette[s % 6]);
        legend.emplace_back(to_string(config.strategies[s]), kPalette[s % 6]);
      }
      canvas.hline(0.0, "#444444");
      canvas.legend(legend);
      write_file(dir / "regulated_output.svg",
                 canvas.render("Regulated output under worst-case attacks",
                               "step", "z"));
    }
    return RunStatus::Ok;
  } catch (const InfeasibleProblem& e) {
    return write_error(dir, RunStatus::Infeasible, e.what());
  } catch (const std::invalid_argument& e) {
    return write_error(dir, RunStatus::ConfigError, e.what());
  } catch (const std::exception& e) {
    return write_error(dir, RunStatus::SolverFailure, e.what());
  }
}

RunStatus cmd_attack(const ExperimentConfig& config,
                     const std::string& controller_path) {
  const fs::path dir = resolve_output_dir(config);
  try {
    std::ifstream in(controller_path, std::ios::binary);
    if (!in) {
      throw std::invalid_argument("cannot read controller " + controller_path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    const json doc = json::parse(ss.str());
    const int horizon = doc.at("horizon").get<int>();
    const LtvSystem plant = config.plant.build(horizon);
    const SlsResponse omega = response_from_json(doc.at("omega").dump());
    const Eigen::MatrixXd gain = detail::matrix_from_json(doc.at("gain"));

    const LiftedSystem lifted = lift(plant);
    if (omega.R.rows() != lifted.Nx || omega.L.rows() != lifted.Nu ||
        omega.L.cols() != lifted.Ny || gain.rows() != lifted.Nu ||
        gain.cols() != lifted.Ny) {
      throw std::invalid_argument(
          "controller dimensions do not match the configured plant");
    }

    // Everything below is recomputed from the controller and the plant.
    const StealthSpec spec(config.alpha);
    const RegretCertificate cert = regret_metric(omega, lifted, spec);
    if (cert.status == RegretStatus::SolverFailure) {
      return write_error(dir, RunStatus::SolverFailure,
                         "certificate solve failed");
    }

    json aj;
    aj["kind"] = "attack";
    aj["alpha"] = config.alpha;
    aj["horizon"] = horizon;
    aj["lambda_star"] = cert.lambda_star;
    aj["mu_star"] = cert.mu_star;
    aj["achieved_regret"] = cert.achieved_regret;
    aj["stealth_level"] = cert.stealth_level;
    aj["status"] = cert.status == RegretStatus::Optimal ? "optimal"
                                                        : "unbounded_regret";
    aj["attack"] = detail::vector_to_json(cert.attack);
    write_file(dir / "attack.json", aj.dump(2) + "\n");

    if (cert.status == RegretStatus::Optimal) {
      const AttackRun run = apply_attack(plant, gain, cert.attack);
      std::string tc = "k";
      for (int c = 0; c < plant.nx; ++c) tc += ",x" + std::to_string(c);
      for (int c = 0; c < plant.nu; ++c) tc += ",u" + std::to_string(c);
      for (int c = 0; c < plant.ny; ++c) tc += ",y" + std::to_string(c);
      for (int c = 0; c < plant.nz; ++c) tc += ",z" + std::to_string(c);
      tc += ",cumulative_stealth\n";
      for (int k = 0; k <= horizon; ++k) {
        tc += std::to_string(k);
        for (int c = 0; c < plant.nx; ++c) {
          tc += "," + format_csv_double(run.traj.x(k, c));
        }
        for (int c = 0; c < plant.nu; ++c) {
          tc += "," + format_csv_double(run.traj.u(k, c));
        }
        for (int c = 0; c < plant.ny; ++c) {
          tc += "," + format_csv_double(run.traj.y(k, c));
        }
        for (int c = 0; c < plant.nz; ++c) {
          tc += "," + format_csv_double(run.traj.z(k, c));
        }
        tc += "," + format_csv_double(run.cumulative_stealth[k]) + "\n";
      }
      write_file(dir / "trajectory.csv", tc);
    }
    return RunStatus::Ok;
  } catch (const InfeasibleProblem& e) {
    return write_error(dir, RunStatus::Infeasible, e.what());
  } catch (const std::invalid_argument& e) {
    return write_error(dir, RunStatus::ConfigError, e.what());
  } catch (const std::exception& e) {
    return write_error(dir, RunStatus::SolverFailure, e.what());
  }
}

}  // namespace rosyn
