#ifndef NUFHT_TOOLS_COMMANDS_HPP
#define NUFHT_TOOLS_COMMANDS_HPP

// Subcommands of the `nufht` tool. run_cli() is the whole program minus
// main(), so tests can drive it with captured streams.
//
// Exit status: 0 on success, 2 for usage, validation and I/O errors, 3 when
// a numerical procedure does not converge or the Helmholtz operator is
// singular. Every failure prints one line to the error stream.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <new>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nufht/apps.hpp"
#include "nufht/bounds.hpp"
#include "nufht/errors.hpp"
#include "nufht/experiments.hpp"
#include "nufht/io.hpp"
#include "nufht/special.hpp"
#include "nufht/transform.hpp"

namespace nufht::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitInternal = 1;

namespace detail {

// Writes to --out when given, otherwise to the command's output stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::trunc);
      if (!*file_) throw IoError("cannot open '" + path + "' for writing");
      stream_ = file_.get();
    }
    path_ = path.empty() ? "output" : path;
  }

  std::ostream& stream() { return *stream_; }

  void finish() {
    stream_->flush();
    if (!*stream_) throw IoError("write error on '" + path_ + "'");
  }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
  std::string path_;
};

inline std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

struct TransformArgs {
  int nu = 0;
  double eps = 1e-12;
  std::string freqs;
  std::string points;
  std::string coeffs;
  std::string out;
  std::size_t min_size = 1024;
  std::string format = "text";
};

inline void cmd_transform(const TransformArgs& a) {
  const auto format = parse_array_format(a.format);
  const auto freqs = read_array(a.freqs, format);
  const auto points = read_array(a.points, format);
  const auto coeffs = read_array(a.coeffs, format);
  if (coeffs.size() != points.size()) {
    throw std::invalid_argument("--coeffs holds " + std::to_string(coeffs.size()) + " values but --points holds " +
                                std::to_string(points.size()));
  }
  PlanOptions options;
  options.min_size = a.min_size;
  const auto plan = build_plan(a.nu, a.eps, freqs, points, options);
  write_array(a.out, plan.apply(coeffs), format);
}

struct BenchArgs {
  std::string experiment;
  std::string out;
  std::uint64_t seed = 1;
  std::size_t max_n = std::size_t(1) << 14;
  bool direct = false;
  int repeats = 1;
};

inline void cmd_bench(const BenchArgs& a, std::ostream& fallback) {
  detail::Sink sink(a.out, fallback);
  BenchOptions options;
  options.seed = a.seed;
  options.max_n = a.max_n;
  options.direct = a.direct;
  options.repeats = a.repeats;
  write_bench_header(sink.stream());
  run_bench(a.experiment, options, [&](const BenchRecord& r) {
    write_bench_row(sink.stream(), r);
    sink.stream().flush();
  });
  sink.finish();
}

struct TablesArgs {
  std::string dump;
  bool warm = false;
};

inline void cmd_tables(const TablesArgs& a, std::ostream& out) {
  if (a.dump.empty() && !a.warm) throw std::invalid_argument("tables: pass --dump FILE or --warm");
  auto& table = default_param_table();
  table.warm();
  if (!a.dump.empty()) {
    detail::Sink sink(a.dump, out);
    table.dump(sink.stream());
    sink.finish();
  }
  out << "parameter table holds " << table.size() << " entries\n";
}

struct DiskFtArgs {
  double omega_max = 1024.0;
  std::size_t n = 10000;
  double eps = 1e-12;
  std::string out;
};

// Fourier transform of the unit disk indicator at w_j = omega_max j / n,
// j = 1..n, next to the closed form 2 pi J_1(w) / w.
inline void cmd_disk_ft(const DiskFtArgs& a, std::ostream& fallback) {
  if (!(a.omega_max > 0.0) || !std::isfinite(a.omega_max)) throw std::invalid_argument("--omega-max must be positive");
  if (a.n == 0) throw std::invalid_argument("--n must be positive");
  std::vector<double> freqs(a.n);
  for (std::size_t j = 0; j < a.n; ++j) freqs[j] = a.omega_max * static_cast<double>(j + 1) / static_cast<double>(a.n);
  const auto result = radial_fourier_disk([](double) { return 1.0; }, freqs, a.eps);

  detail::Sink sink(a.out, fallback);
  auto& os = sink.stream();
  os << "omega,value,exact,abs_err\n";
  for (std::size_t j = 0; j < a.n; ++j) {
    const double exact = 2.0 * std::numbers::pi * bessel_j(1, freqs[j]) / freqs[j];
    os << detail::format_double(freqs[j]) << ',' << detail::format_double(result.values[j]) << ','
       << detail::format_double(exact) << ',' << detail::format_double(std::abs(result.values[j] - exact)) << '\n';
  }
  sink.finish();
}

struct HelmholtzArgs {
  double kappa = 25.0;
  double eps = 1e-8;
  std::size_t grid = 64;
  std::string forcing = "manufactured";
  std::string out;
};

// Solves (Laplacian + kappa^2) u = f with u = 0 on the unit circle and
// samples u on radii i / (N - 1) and angles 2 pi q / N.
//
// manufactured: f = (kappa^2 - j_{0,2}^2) J_0(j_{0,2} r), u = J_0(j_{0,2} r).
// gaussian:     f = exp(-80 |x - x0|^2) with |x0| = 0.3, no closed form.
inline void cmd_helmholtz(const HelmholtzArgs& a, std::ostream& fallback) {
  using complex = std::complex<double>;
  if (a.grid < 2) throw std::invalid_argument("--grid must be at least 2");
  if (!(a.kappa > 0.0) || !std::isfinite(a.kappa)) throw std::invalid_argument("--kappa must be positive");
  const bool manufactured = a.forcing == "manufactured";
  if (!manufactured && a.forcing != "gaussian") {
    throw std::invalid_argument("--forcing must be manufactured or gaussian");
  }

  const double root = bessel_root(0, 2);
  const double k2 = a.kappa * a.kappa;
  DiskFunction f;
  if (manufactured) {
    f = [=](double r, double) { return complex((k2 - root * root) * bessel_j(0, root * r)); };
  } else {
    f = [](double r, double theta) {
      const double d2 = r * r - 2.0 * r * 0.3 * std::cos(theta - 1.0) + 0.09;
      return complex(std::exp(-80.0 * d2));
    };
  }
  const auto solution = helmholtz_solve(f, a.kappa, a.eps);

  const std::size_t n = a.grid;
  std::vector<double> radii(n), thetas(n);
  for (std::size_t i = 0; i < n; ++i) {
    radii[i] = static_cast<double>(i) / static_cast<double>(n - 1);
    thetas[i] = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
  }
  radii.back() = 1.0;
  const auto u = fb_synthesize(solution.solution, radii, thetas, std::min(a.eps, 1e-12));

  double peak = 0.0, boundary = 0.0, err = 0.0, exact_peak = 0.0;
  detail::Sink sink(a.out, fallback);
  auto& os = sink.stream();
  os << "r,theta,re,im\n";
  for (std::size_t i = 0; i < n; ++i) {
    const double exact = manufactured ? bessel_j(0, root * radii[i]) : 0.0;
    exact_peak = std::max(exact_peak, std::abs(exact));
    for (std::size_t q = 0; q < n; ++q) {
      const complex v = u[i * n + q];
      peak = std::max(peak, std::abs(v));
      if (i + 1 == n) boundary = std::max(boundary, std::abs(v));
      if (manufactured) err = std::max(err, std::abs(v - exact));
      os << detail::format_double(radii[i]) << ',' << detail::format_double(thetas[q]) << ','
         << detail::format_double(v.real()) << ',' << detail::format_double(v.imag()) << '\n';
    }
  }
  os << "# max_abs_u " << detail::format_double(peak) << '\n';
  os << "# max_boundary_residual " << detail::format_double(boundary) << '\n';
  if (manufactured) os << "# rel_err " << detail::format_double(err / exact_peak) << '\n';
  sink.finish();
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nonuniform fast Hankel transform tool", "nufht"};
  app.require_subcommand(1);

  TransformArgs transform;
  auto* sub_transform = app.add_subcommand("transform", "Apply the transform to arrays read from files");
  sub_transform->add_option("--nu", transform.nu, "Integer order in [0, 100]")->required();
  sub_transform->add_option("--eps", transform.eps, "Tolerance in [1e-15, 1e-4]")->capture_default_str();
  sub_transform->add_option("--freqs", transform.freqs, "Frequencies w_j, nonnegative")->required();
  sub_transform->add_option("--points", transform.points, "Points r_k, nonnegative")->required();
  sub_transform->add_option("--coeffs", transform.coeffs, "Coefficients c_k, one per point")->required();
  sub_transform->add_option("--out", transform.out, "Output file for g_j")->required();
  sub_transform->add_option("--min-size", transform.min_size, "Smallest block split further")->capture_default_str();
  sub_transform->add_option("--format", transform.format, "Array format of all files")
      ->check(CLI::IsMember({"text", "binary"}))
      ->capture_default_str();

  BenchArgs bench;
  auto* sub_bench = app.add_subcommand("bench", "Run a timing or accuracy experiment and emit CSV");
  sub_bench->add_option("--experiment", bench.experiment, "Experiment name")
      ->required()
      ->check(CLI::IsMember(bench_experiments()));
  sub_bench->add_option("--out", bench.out, "CSV file (default: standard output)");
  sub_bench->add_option("--seed", bench.seed, "Seed of the mt19937_64 input generator")->capture_default_str();
  sub_bench->add_option("--max-n", bench.max_n, "Largest size in size sweeps")->capture_default_str();
  sub_bench->add_flag("--direct", bench.direct, "Also time dense summation");
  sub_bench->add_option("--repeats", bench.repeats, "Report the fastest of this many runs")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  TablesArgs tables;
  auto* sub_tables = app.add_subcommand("tables", "Populate or dump the expansion parameter table");
  auto* dump_opt = sub_tables->add_option("--dump", tables.dump, "Write the full table to FILE");
  sub_tables->add_flag("--warm", tables.warm, "Populate every (nu, eps) entry")->excludes(dump_opt);

  DiskFtArgs disk;
  auto* sub_disk = app.add_subcommand("disk-ft", "Fourier transform of the unit disk indicator");
  sub_disk->add_option("--omega-max", disk.omega_max, "Largest frequency")->capture_default_str();
  sub_disk->add_option("--n", disk.n, "Number of frequencies")->capture_default_str();
  sub_disk->add_option("--eps", disk.eps, "Absolute tolerance")->capture_default_str();
  sub_disk->add_option("--out", disk.out, "CSV file (default: standard output)");

  HelmholtzArgs helm;
  auto* sub_helm = app.add_subcommand("helmholtz", "Dirichlet Helmholtz solve on the unit disk");
  sub_helm->add_option("--kappa", helm.kappa, "Wavenumber")->capture_default_str();
  sub_helm->add_option("--eps", helm.eps, "Tolerance")->capture_default_str();
  sub_helm->add_option("--grid", helm.grid, "Samples per polar direction")->capture_default_str();
  sub_helm->add_option("--forcing", helm.forcing, "Right-hand side")
      ->check(CLI::IsMember({"manufactured", "gaussian"}))
      ->capture_default_str();
  sub_helm->add_option("--out", helm.out, "CSV file (default: standard output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "nufht: " << detail::one_line(e.what()) << '\n';
    return kExitUsage;
  }

  try {
    if (sub_transform->parsed()) {
      cmd_transform(transform);
    } else if (sub_bench->parsed()) {
      cmd_bench(bench, out);
    } else if (sub_tables->parsed()) {
      cmd_tables(tables, out);
    } else if (sub_disk->parsed()) {
      cmd_disk_ft(disk, out);
    } else if (sub_helm->parsed()) {
      cmd_helmholtz(helm, out);
    }
  } catch (const ResonanceError& e) {
    err << "nufht: " << detail::one_line(e.what()) << '\n';
    return kExitNumerical;
  } catch (const ConvergenceError& e) {
    err << "nufht: " << detail::one_line(e.what()) << '\n';
    return kExitNumerical;
  } catch (const IoError& e) {
    err << "nufht: " << detail::one_line(e.what()) << '\n';
    return kExitUsage;
  } catch (const std::logic_error& e) {
    // invalid_argument, domain_error, length_error and out_of_range.
    err << "nufht: " << detail::one_line(e.what()) << '\n';
    return kExitUsage;
  } catch (const std::bad_alloc&) {
    err << "nufht: out of memory\n";
    return kExitInternal;
  } catch (const std::exception& e) {
    err << "nufht: " << detail::one_line(e.what()) << '\n';
    return kExitInternal;
  }
  return kExitOk;
}

}  // namespace nufht::cli

#endif  // NUFHT_TOOLS_COMMANDS_HPP
