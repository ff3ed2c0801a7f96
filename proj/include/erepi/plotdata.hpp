#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "erepi/io.hpp"
#include "erepi/meanfield.hpp"
#include "erepi/network.hpp"
#include "erepi/stats.hpp"

// Turns the CSV written by a sweep into figure-ready tables. Everything here
// reads back files from disk so it can run on an old output directory.
namespace erepi::plot {

namespace fs = std::filesystem;

namespace detail {

inline double cell_double(const io::CsvTable& t, const std::vector<std::string>& row, const std::string& col) {
  const std::string& s = row[t.column(col)];
  return s.empty() ? std::nan("") : parse_double(s);
}

inline const std::string& cell(const io::CsvTable& t, const std::vector<std::string>& row, const std::string& col) {
  return row[t.column(col)];
}

inline std::vector<std::string> copy_columns(const io::CsvTable& in, const std::vector<std::string>& cols,
                                             const fs::path& out) {
  io::CsvWriter w(cols);
  std::vector<std::size_t> idx;
  for (const auto& c : cols) idx.push_back(in.column(c));
  for (const auto& row : in.rows) {
    std::vector<io::CsvCell> cells;
    for (auto i : idx) cells.emplace_back(row[i]);
    w.row(cells);
  }
  w.save(out);
  return {out.filename().string()};
}

inline std::vector<std::string> beta_curve(const fs::path& in, const fs::path& out) {
  const auto t = io::read_csv(in / "beta_curve.csv");
  auto a = copy_columns(t, {"p", "k", "mean_beta"}, out / "beta_vs_p.csv");
  auto b = copy_columns(t, {"p", "k", "se", "mean_fit_se"}, out / "se_vs_p.csv");
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

inline std::vector<std::string> transient(const fs::path& in, const fs::path& out) {
  const auto t = io::read_csv(in / "transient.csv");
  return copy_columns(t, {"p", "k", "t50", "t75", "t100", "T_c", "inv_beta"}, out / "transient_vs_p.csv");
}

inline std::vector<std::string> components_sweep(const fs::path& in, const fs::path& out) {
  const auto t = io::read_csv(in / "components.csv");
  io::CsvWriter w({"p", "k", "N_G", "m", "S", "giant_fraction", "giant_fraction_theory"});
  for (const auto& row : t.rows) {
    const double n = cell_double(t, row, "n");
    const double k = cell_double(t, row, "k");
    const double ng = cell_double(t, row, "N_G");
    w.row({cell(t, row, "p"), cell(t, row, "k"), cell(t, row, "N_G"), cell(t, row, "m"), cell(t, row, "S"),
           ng / n, giant_fraction_theory(k)});
  }
  w.save(out / "components_vs_p.csv");
  return {"components_vs_p.csv"};
}

inline std::vector<std::string> equilibrium(const fs::path& in, const fs::path& out) {
  const auto t = io::read_csv(in / "equilibrium.csv");
  // one row per p, one N_eq column per z0, in first-seen order
  std::vector<std::string> z0s;
  std::vector<std::string> ps;
  std::map<std::string, std::vector<std::string>> base;
  std::map<std::pair<std::string, std::string>, std::string> neq;
  for (const auto& row : t.rows) {
    const auto& p = cell(t, row, "p");
    const auto& z0 = cell(t, row, "z0");
    if (std::find(z0s.begin(), z0s.end(), z0) == z0s.end()) z0s.push_back(z0);
    if (!base.count(p)) {
      ps.push_back(p);
      base[p] = {p, cell(t, row, "k"), cell(t, row, "N_G")};
    }
    neq[{p, z0}] = cell(t, row, "N_eq");
  }
  std::vector<std::string> header{"p", "k", "N_G"};
  for (const auto& z : z0s) header.push_back("N_eq_z0_" + z);
  io::CsvWriter w(header);
  for (const auto& p : ps) {
    std::vector<io::CsvCell> cells;
    for (const auto& s : base[p]) cells.emplace_back(s);
    for (const auto& z : z0s) {
      auto it = neq.find({p, z});
      cells.emplace_back(it == neq.end() ? std::string() : it->second);
    }
    w.row(cells);
  }
  w.save(out / "equilibrium_vs_p.csv");
  return {"equilibrium_vs_p.csv"};
}

inline std::vector<std::string> simulate(const fs::path& in, const fs::path& out) {
  const auto ens = io::read_csv(in / "ensemble.csv");
  const auto mean = io::read_csv(in / "trajectory.csv");
  const auto reps = io::read_csv(in / "replicas.csv");

  std::vector<std::string> replica_ids;
  std::map<std::string, std::vector<std::string>> series;
  for (const auto& row : ens.rows) {
    const auto& r = cell(ens, row, "replica");
    if (!series.count(r)) replica_ids.push_back(r);
    series[r].push_back(cell(ens, row, "Z"));
  }

  // logistic reference from the mean population and the mean fitted beta
  double pop = 0.0, beta = 0.0;
  std::size_t nb = 0;
  for (const auto& row : reps.rows) {
    pop += cell_double(reps, row, "population");
    const double b = cell_double(reps, row, "beta");
    if (!std::isnan(b)) beta += b, ++nb;
  }
  std::optional<MeanFieldParams> mf;
  if (!reps.rows.empty() && nb > 0 && !mean.rows.empty()) {
    MeanFieldParams m{pop / static_cast<double>(reps.rows.size()), cell_double(mean, mean.rows[0], "Z"),
                      beta / static_cast<double>(nb)};
    if (m.z0 > 0.0 && m.z0 < m.n_eff && m.beta > 0.0) mf = m;
  }

  std::vector<std::string> header{"t", "mean_Z", "logistic_Z"};
  for (const auto& r : replica_ids) header.push_back("Z_r" + r);
  io::CsvWriter w(header);
  for (const auto& row : mean.rows) {
    const auto& ts = cell(mean, row, "t");
    const auto t = static_cast<std::size_t>(parse_u64(ts));
    std::vector<io::CsvCell> cells{ts, cell(mean, row, "Z")};
    cells.emplace_back(mf ? logistic_z(static_cast<double>(t), *mf) : std::nan(""));
    for (const auto& r : replica_ids) {
      const auto& s = series[r];
      cells.emplace_back(t < s.size() ? s[t] : s.back());
    }
    w.row(cells);
  }
  w.save(out / "trajectories_plot.csv");
  return {"trajectories_plot.csv"};
}

inline std::vector<std::string> calibrate(const fs::path& in, const fs::path& out) {
  const auto t = io::read_csv(in / "betas.csv");
  std::vector<double> betas;
  for (const auto& row : t.rows) betas.push_back(cell_double(t, row, "beta"));
  std::sort(betas.begin(), betas.end());
  io::CsvWriter w({"rank", "beta", "normal_quantile"});
  const double n = static_cast<double>(betas.size());
  for (std::size_t i = 0; i < betas.size(); ++i)
    w.row({i + 1, betas[i], normal_quantile((static_cast<double>(i + 1) - 0.375) / (n + 0.25))});
  w.save(out / "beta_qq.csv");
  return {"beta_qq.csv"};
}

inline std::vector<std::string> pd_scan(const fs::path& in, const fs::path& out) {
  const auto pts = io::read_csv(in / "pd_points.csv");
  io::CsvWriter plane({"ln_n", "ln_p", "pass"});
  for (const auto& row : pts.rows)
    plane.row({std::log(cell_double(pts, row, "n")), std::log(cell_double(pts, row, "p")), cell(pts, row, "pass")});
  plane.save(out / "pd_plane.csv");
  std::vector<std::string> files{"pd_plane.csv"};

  const auto pd = io::read_csv(in / "pd.csv");
  io::CsvWriter vs({"n", "p_d", "ln_n", "ln_p_d"});
  for (const auto& row : pd.rows) {
    const double n = cell_double(pd, row, "n");
    const double p = cell_double(pd, row, "p_d");
    vs.row({cell(pd, row, "n"), cell(pd, row, "p_d"), std::log(n), std::log(p)});
  }
  vs.save(out / "pd_vs_n.csv");
  files.push_back("pd_vs_n.csv");

  if (fs::exists(in / "separatrix.csv")) {
    const auto sep = io::read_csv(in / "separatrix.csv");
    io::CsvWriter line({"ln_n", "ln_p"});
    if (!sep.rows.empty()) {
      const double slope = cell_double(sep, sep.rows[0], "slope");
      const double icpt = cell_double(sep, sep.rows[0], "intercept");
      std::vector<double> xs;
      for (const auto& row : pd.rows) xs.push_back(std::log(cell_double(pd, row, "n")));
      std::sort(xs.begin(), xs.end());
      xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
      for (double x : xs) line.row({x, slope * x + icpt});
    }
    line.save(out / "separatrix_line.csv");
    files.push_back("separatrix_line.csv");
  }
  return files;
}

inline std::vector<std::string> generate(const fs::path& in, const fs::path& out) {
  const auto t = io::read_csv(in / "degrees.csv");
  double total = 0.0;
  for (const auto& row : t.rows) total += cell_double(t, row, "count");
  io::CsvWriter w({"k", "fraction", "poisson_fraction"});
  for (const auto& row : t.rows)
    w.row({cell(t, row, "k"), total > 0 ? cell_double(t, row, "count") / total : std::nan(""),
           cell_double(t, row, "poisson_expected") / (total > 0 ? total : 1.0)});
  w.save(out / "degree_plot.csv");
  return {"degree_plot.csv"};
}

}  // namespace detail

/// Writes the plot tables for the output of `subcommand` found in `in` into
/// `out`; returns the file names written.
inline std::vector<std::string> emit_plotdata(const std::string& subcommand, const fs::path& in,
                                              const fs::path& out) {
  require(fs::is_directory(in), ErrorKind::FileNotFound, "no such output directory " + in.string());
  fs::create_directories(out);
  if (subcommand == "beta-curve") return detail::beta_curve(in, out);
  if (subcommand == "transient-times") return detail::transient(in, out);
  if (subcommand == "components-sweep") return detail::components_sweep(in, out);
  if (subcommand == "equilibrium-sweep") return detail::equilibrium(in, out);
  if (subcommand == "simulate") return detail::simulate(in, out);
  if (subcommand == "calibrate") return detail::calibrate(in, out);
  if (subcommand == "pd-scan") return detail::pd_scan(in, out);
  if (subcommand == "generate") return detail::generate(in, out);
  throw Error(ErrorKind::InvalidParameter, "no plot data defined for '" + subcommand + "'");
}

}  // namespace erepi::plot
