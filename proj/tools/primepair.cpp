// primepair: prime-pair constants, pair counting, and mean-value
// experiments from the command line.
//
// Data goes to stdout, diagnostics to stderr.  Exit codes: 0 on
// success, 2 for argument or domain errors, 3 for overflow or
// representation errors.  Output bytes never depend on the thread
// count.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "primepair/cache.hpp"
#include "primepair/constants.hpp"
#include "primepair/counting.hpp"
#include "primepair/meanvalue.hpp"
#include "primepair/primes.hpp"
#include "primepair/residues.hpp"

namespace {

using namespace primepair;
namespace fs = std::filesystem;

enum class OutFormat { Csv, Tsv, Markdown };

struct RunConfig {
  u64 truncation_bound = 1000000;
  u64 sieve_limit = kSieveLimitMax;
  OutFormat format = OutFormat::Csv;
  std::string cache_dir;
  bool no_cache = false;
  unsigned threads = 0;  // 0 = auto
};

std::string fmt_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_fixed(double v, int digits) {
  if (v == 0.0) return "0";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void emit_table(const RunConfig& config, const std::vector<std::string>& header,
                const std::vector<std::vector<std::string>>& rows) {
  auto join = [](const std::vector<std::string>& cells, char sep, bool quote) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) line += sep;
      line += quote ? csv_quote(cells[i]) : cells[i];
    }
    return line;
  };
  switch (config.format) {
    case OutFormat::Csv:
      std::cout << join(header, ',', true) << "\n";
      for (const auto& row : rows) std::cout << join(row, ',', true) << "\n";
      break;
    case OutFormat::Tsv:
      std::cout << join(header, '\t', false) << "\n";
      for (const auto& row : rows) std::cout << join(row, '\t', false) << "\n";
      break;
    case OutFormat::Markdown: {
      auto md = [](const std::vector<std::string>& cells) {
        std::string line = "|";
        for (const auto& cell : cells) line += " " + cell + " |";
        return line;
      };
      std::cout << md(header) << "\n|";
      for (std::size_t i = 0; i < header.size(); ++i) std::cout << " --- |";
      std::cout << "\n";
      for (const auto& row : rows) std::cout << md(row) << "\n";
      break;
    }
  }
}

std::string join_u64(const std::vector<u64>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

std::string estimate_row_kind(ConstantKind kind) { return detail::kind_name(kind); }

void emit_estimate(const RunConfig& config, ConstantKind kind, unsigned k, i64 q,
                   const EulerProductEstimate& est) {
  emit_table(config, {"kind", "k", "q", "P", "value", "vanished", "reducible"},
             {{estimate_row_kind(kind), std::to_string(k), std::to_string(q),
               std::to_string(est.truncation_bound), fmt_g17(est.value),
               est.vanished ? "1" : "0", est.reducible ? "1" : "0"}});
}

void check_sieve_limit(const RunConfig& config, u64 x) {
  if (x > config.sieve_limit)
    throw std::invalid_argument("x exceeds the configured sieve limit " +
                                std::to_string(config.sieve_limit));
}

// Table of counts for the family (p, p^2 - 2): columns named after the
// published comparison, with the prediction L_2(x) = round(1.6916 li_2(x))
// and the ratio rho(x) shown from 10^4 up.
void run_table_1(const RunConfig& config, u64 max_x) {
  check_sieve_limit(config, max_x);
  std::vector<u64> xs;
  for (u64 x = 10; x <= max_x; x *= 10) {
    xs.push_back(x);
    if (x > max_x / 10) break;
  }
  auto records = table_report(PairFamily{2, -2}, xs, 1.6916, config.threads);
  std::vector<std::vector<std::string>> rows;
  for (const auto& rec : records) {
    std::vector<std::string> row{std::to_string(rec.x), std::to_string(rec.pair_count), "", ""};
    if (rec.x >= 10000) {
      row[2] = std::to_string(static_cast<long long>(rec.predicted));
      row[3] = fmt_fixed(rec.ratio, 3);
    }
    rows.push_back(std::move(row));
  }
  emit_table(config, {"x", "pi^2_{-2}(x)", "L_2(x)", "rho(x)"}, rows);
}

// Quadratic constants over offsets 2r = 2..30, both signs.
void run_table_2(const RunConfig& config) {
  std::vector<i64> offsets;
  for (i64 tr = 2; tr <= 30; tr += 2) {
    offsets.push_back(tr);
    offsets.push_back(-tr);
  }
  auto gammas = gamma_constants_batch(2, offsets, config.truncation_bound, config.threads);
  auto cs = c_constants_batch(2, offsets, config.truncation_bound, config.threads);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < offsets.size(); i += 2) {
    rows.push_back({std::to_string(offsets[i]), fmt_fixed(gammas[i].value, 4),
                    fmt_fixed(cs[i].value, 4), fmt_fixed(gammas[i + 1].value, 4),
                    fmt_fixed(cs[i + 1].value, 4)});
  }
  emit_table(config, {"2r", "gamma^2_{2r}", "C^2_{2r}", "gamma^2_{-2r}", "C^2_{-2r}"}, rows);
}

// 3-prime lists below 500, one row per offset q.
void run_table_3(const RunConfig& config) {
  std::vector<std::vector<std::string>> rows;
  for (i64 q : {2, 3, 4, 6, 8, 9, 10, 12, 14, 16, 18, 20, 22, 24})
    rows.push_back({std::to_string(q), join_u64(three_primes_below(q, 500))});
  emit_table(config, {"q", "Corresponding 3-primes p<500"}, rows);
}

// Cubic constants for even q = 2r up to 24.
void run_table_4(const RunConfig& config) {
  std::vector<i64> offsets;
  for (i64 q = 2; q <= 24; q += 2) offsets.push_back(q);
  auto gammas = gamma_constants_batch(3, offsets, config.truncation_bound, config.threads);
  auto cs = c_constants_batch(3, offsets, config.truncation_bound, config.threads);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < offsets.size(); ++i)
    rows.push_back({std::to_string(offsets[i]), fmt_fixed(gammas[i].value, 4),
                    fmt_fixed(cs[i].value, 4)});
  emit_table(config, {"q=2r", "gamma^3_q", "C^3_{2r}"}, rows);
}

// Resolution order for the cache directory: --no-cache wins, then the
// PRIMEPAIR_CACHE_DIR environment variable, then --cache-dir, then the
// user cache directory.
fs::path resolve_cache_dir(const RunConfig& config) {
  if (config.no_cache) return {};
  if (const char* env = std::getenv("PRIMEPAIR_CACHE_DIR"); env && *env) return fs::path(env);
  if (!config.cache_dir.empty()) return fs::path(config.cache_dir);
  if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg && *xdg)
    return fs::path(xdg) / "primepair";
  if (const char* home = std::getenv("HOME"); home && *home)
    return fs::path(home) / ".cache" / "primepair";
  return {};
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig config;
  CLI::App app{"prime-pair constants, pair counts, and mean-value experiments"};
  app.set_version_flag("--version", "primepair 1.0.0");
  app.require_subcommand(1);
  app.fallthrough();

  app.add_option("-P,--truncation-bound", config.truncation_bound,
                 "largest prime in truncated Euler products")
      ->check(CLI::Range(u64(3), u64(1) << 40))
      ->capture_default_str();
  std::map<std::string, OutFormat> format_names{
      {"csv", OutFormat::Csv}, {"tsv", OutFormat::Tsv}, {"markdown", OutFormat::Markdown}};
  app.add_option("--format", config.format, "output format")
      ->transform(CLI::CheckedTransformer(format_names, CLI::ignore_case))
      ->default_str("csv");
  app.add_option("--threads", config.threads, "worker threads (0 = auto)")
      ->capture_default_str();
  app.add_option("--sieve-limit", config.sieve_limit, "largest x accepted for counting scans")
      ->check(CLI::Range(u64(2), kSieveLimitMax))
      ->capture_default_str();
  app.add_option("--cache-dir", config.cache_dir, "directory for the constants cache");
  app.add_flag("--no-cache", config.no_cache, "disable the constants cache");

  std::function<void()> action;

  {
    auto* cmd = app.add_subcommand("constant", "adjusted pair constant C^k_{2r}");
    auto k = std::make_shared<unsigned>(2);
    auto two_r = std::make_shared<i64>(0);
    cmd->add_option("--k", *k, "degree k of the family (p, p^k + 2r)")->required();
    cmd->add_option("--two-r", *two_r, "even pair offset 2r")->required();
    cmd->callback([&, k, two_r] {
      action = [&, k, two_r] {
        auto est = c_constant(*k, *two_r, config.truncation_bound, config.threads);
        emit_estimate(config, ConstantKind::PairAdjusted, *k, *two_r, est);
      };
    });
  }

  {
    auto* cmd = app.add_subcommand("gamma", "single-polynomial constant gamma^k_q");
    auto k = std::make_shared<unsigned>(2);
    auto q = std::make_shared<i64>(0);
    cmd->add_option("--k", *k, "degree k of x^k + q")->required();
    cmd->add_option("--q", *q, "nonzero offset q")->required();
    cmd->callback([&, k, q] {
      action = [&, k, q] {
        auto est = gamma_constant(*k, *q, config.truncation_bound, config.threads);
        emit_estimate(config, ConstantKind::SingleGamma, *k, *q, est);
      };
    });
  }

  {
    auto* cmd = app.add_subcommand("hl", "classical Hardy-Littlewood constant C_{2r}");
    auto two_r = std::make_shared<i64>(0);
    cmd->add_option("--two-r", *two_r, "even pair offset 2r")->required();
    cmd->callback([&, two_r] {
      action = [&, two_r] {
        auto est = hl_constant(*two_r, config.truncation_bound, config.threads);
        emit_estimate(config, ConstantKind::HardyLittlewood, 1, *two_r, est);
      };
    });
  }

  {
    auto* cmd = app.add_subcommand("count", "count pairs (p, p^k + 2r) with p <= x");
    auto k = std::make_shared<unsigned>(2);
    auto two_r = std::make_shared<i64>(0);
    auto x = std::make_shared<u64>(0);
    cmd->add_option("--k", *k, "degree k")->required();
    cmd->add_option("--two-r", *two_r, "even pair offset 2r")->required();
    cmd->add_option("--x", *x, "count primes p <= x")->required();
    cmd->callback([&, k, two_r, x] {
      action = [&, k, two_r, x] {
        check_sieve_limit(config, *x);
        PairFamily family{*k, *two_r};
        double bh = bh_constant(family, config.truncation_bound, config.threads);
        auto records = table_report(family, {*x}, bh, config.threads);
        const auto& rec = records[0];
        emit_table(config,
                   {"k", "two_r", "x", "pairs", "theta", "li_2", "predicted", "ratio"},
                   {{std::to_string(*k), std::to_string(*two_r), std::to_string(rec.x),
                     std::to_string(rec.pair_count), fmt_g17(rec.theta), fmt_g17(rec.li2),
                     std::to_string(static_cast<long long>(rec.predicted)),
                     fmt_g17(rec.ratio)}});
      };
    });
  }

  {
    auto* cmd = app.add_subcommand("table", "reproduce a published table");
    auto name = std::make_shared<int>(0);
    auto max_x = std::make_shared<u64>(10000000);
    cmd->add_option("--name", *name, "table number 1..4")->required()->check(CLI::Range(1, 4));
    cmd->add_option("--max-x", *max_x, "largest x for table 1 (powers of 10 up to here)");
    cmd->callback([&, name, max_x] {
      action = [&, name, max_x] {
        switch (*name) {
          case 1: run_table_1(config, *max_x); break;
          case 2: run_table_2(config); break;
          case 3: run_table_3(config); break;
          case 4: run_table_4(config); break;
        }
      };
    });
  }

  {
    auto* cmd = app.add_subcommand("mean", "windowed mean of adjusted constants");
    auto k = std::make_shared<unsigned>(2);
    auto lambda = std::make_shared<double>(0.0);
    auto window = std::make_shared<std::string>("both");
    cmd->add_option("--k", *k, "degree k")->required();
    cmd->add_option("--lambda", *lambda, "window length, offsets 0 < |2r| <= lambda")->required();
    cmd->add_option("--window", *window, "both | positive")
        ->check(CLI::IsMember({"both", "positive"}));
    cmd->callback([&, k, lambda, window] {
      action = [&, k, lambda, window] {
        WindowMode mode =
            *window == "positive" ? WindowMode::PositiveOnly : WindowMode::BothSigns;
        auto report = mean_S(*k, *lambda, config.truncation_bound, mode, config.threads);
        emit_table(config, {"k", "lambda", "window", "P", "terms", "sum", "mean", "residual"},
                   {{std::to_string(report.k), fmt_g17(report.lambda), *window,
                     std::to_string(report.truncation_bound), std::to_string(report.terms),
                     fmt_g17(report.sum), fmt_g17(report.mean), fmt_g17(report.residual)}});
      };
    });
  }

  {
    auto* cmd = app.add_subcommand("gamma-mean", "mean of gamma^k_q over an integer window");
    auto k = std::make_shared<unsigned>(2);
    auto q_lo = std::make_shared<i64>(0);
    auto q_hi = std::make_shared<i64>(0);
    cmd->add_option("--k", *k, "degree k")->required();
    cmd->add_option("--q-lo", *q_lo, "window start")->required();
    cmd->add_option("--q-hi", *q_hi, "window end")->required();
    cmd->callback([&, k, q_lo, q_hi] {
      action = [&, k, q_lo, q_hi] {
        double mean = mean_gamma(*k, *q_lo, *q_hi, config.truncation_bound, config.threads);
        emit_table(config, {"k", "q_lo", "q_hi", "P", "mean"},
                   {{std::to_string(*k), std::to_string(*q_lo), std::to_string(*q_hi),
                     std::to_string(config.truncation_bound), fmt_g17(mean)}});
      };
    });
  }

  {
    auto* cmd = app.add_subcommand("three-primes", "primes p < bound whose q has three cube roots");
    auto q = std::make_shared<i64>(0);
    auto bound = std::make_shared<u64>(500);
    cmd->add_option("--q", *q, "nonzero offset q")->required();
    cmd->add_option("--bound", *bound, "upper bound (exclusive)")->capture_default_str();
    cmd->callback([&, q, bound] {
      action = [&, q, bound] { std::cout << join_u64(three_primes_below(*q, *bound)) << "\n"; };
    });
  }

  {
    auto* cmd = app.add_subcommand("cubic-class", "cube-root count class of q mod p");
    auto q = std::make_shared<i64>(0);
    auto p = std::make_shared<u64>(0);
    cmd->add_option("--q", *q, "nonzero offset q")->required();
    cmd->add_option("--p", *p, "prime p = 1 mod 3 not dividing q")->required();
    cmd->callback([&, q, p] {
      action = [&, q, p] {
        CubicClass cls = cubic_classify(*q, *p);
        const char* label = cls == CubicClass::ThreePrime  ? "3-prime"
                            : cls == CubicClass::ZeroPrime ? "0-prime"
                                                           : "1-prime";
        emit_table(config, {"q", "p", "class"},
                   {{std::to_string(*q), std::to_string(*p), label}});
      };
    });
  }

  {
    auto* cmd = app.add_subcommand("residual", "kernel-weighted deviation from mean value one");
    auto k = std::make_shared<unsigned>(2);
    auto lambda = std::make_shared<double>(0.0);
    cmd->add_option("--k", *k, "degree k")->required();
    cmd->add_option("--lambda", *lambda, "window length")->required();
    cmd->callback([&, k, lambda] {
      action = [&, k, lambda] {
        double r = residual_R(*k, *lambda, config.truncation_bound, config.threads);
        emit_table(config, {"k", "lambda", "P", "residual"},
                   {{std::to_string(*k), fmt_g17(*lambda),
                     std::to_string(config.truncation_bound), fmt_g17(r)}});
      };
    });
  }

  {
    auto* cmd = app.add_subcommand("sweep", "windowed means and residuals over several lambdas");
    auto k = std::make_shared<unsigned>(2);
    auto lambdas = std::make_shared<std::vector<double>>();
    cmd->add_option("--k", *k, "degree k")->required();
    cmd->add_option("--lambdas", *lambdas, "window lengths")->required()->delimiter(',');
    cmd->callback([&, k, lambdas] {
      action = [&, k, lambdas] {
        std::vector<std::vector<std::string>> rows;
        for (double lambda : *lambdas) {
          auto report = mean_S(*k, lambda, config.truncation_bound, WindowMode::BothSigns,
                               config.threads);
          rows.push_back({fmt_g17(lambda), fmt_g17(report.sum), fmt_g17(report.mean),
                          fmt_g17(report.residual)});
        }
        emit_table(config, {"lambda", "S", "S/lambda", "R"}, rows);
      };
    });
  }

  {
    auto* cmd = app.add_subcommand("s-m", "corrected partial-sum deviation of C_{2r}");
    auto m = std::make_shared<u64>(0);
    cmd->add_option("--m", *m, "number of offsets, m >= 10")->required();
    cmd->callback([&, m] {
      action = [&, m] {
        double dev = s_m_deviation(*m, config.truncation_bound, config.threads);
        emit_table(config, {"m", "P", "deviation"},
                   {{std::to_string(*m), std::to_string(config.truncation_bound),
                     fmt_g17(dev)}});
      };
    });
  }

  {
    auto* cmd = app.add_subcommand("subsequence", "mean of C_{2hr} over r = 1..count");
    auto h = std::make_shared<u64>(1);
    auto count = std::make_shared<u64>(0);
    cmd->add_option("--step", *h, "index step h")->required();
    cmd->add_option("--count", *count, "number of terms")->required();
    cmd->callback([&, h, count] {
      action = [&, h, count] {
        double mean = subsequence_mean(*h, *count, config.truncation_bound, config.threads);
        emit_table(config, {"h", "count", "P", "mean"},
                   {{std::to_string(*h), std::to_string(*count),
                     std::to_string(config.truncation_bound), fmt_g17(mean)}});
      };
    });
  }

  {
    auto* cmd = app.add_subcommand("li", "logarithmic integral of order m from 2 to x");
    auto m = std::make_shared<unsigned>(2);
    auto x = std::make_shared<double>(0.0);
    cmd->add_option("--m", *m, "power of log t in the denominator")->required();
    cmd->add_option("--x", *x, "upper limit")->required();
    cmd->callback([&, m, x] {
      action = [&, m, x] {
        emit_table(config, {"m", "x", "li_m"},
                   {{std::to_string(*m), fmt_g17(*x), fmt_g17(li(*m, *x))}});
      };
    });
  }

  {
    auto* cmd = app.add_subcommand("cache", "show or clear the constants cache");
    auto clear = std::make_shared<bool>(false);
    cmd->add_flag("--clear", *clear, "remove the cache file");
    cmd->callback([&, clear] {
      action = [&, clear] {
        fs::path dir = resolve_cache_dir(config);
        if (dir.empty()) {
          std::cout << "cache disabled\n";
          return;
        }
        fs::path file = dir / kCacheFileName;
        if (*clear) {
          std::error_code ec;
          fs::remove(file, ec);
          std::cout << "cleared " << file.string() << "\n";
          return;
        }
        emit_table(config, {"path", "rows"},
                   {{file.string(), std::to_string(constant_store().size())}});
      };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  CacheAppender appender;
  try {
    fs::path dir = resolve_cache_dir(config);
    if (!dir.empty()) {
      fs::create_directories(dir);
      load_constant_cache(dir / kCacheFileName, constant_store());
      appender.attach(dir / kCacheFileName, constant_store());
    }
  } catch (const std::exception& e) {
    std::cerr << "warning: constants cache unavailable: " << e.what() << "\n";
  }

  try {
    if (action) action();
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::overflow_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
