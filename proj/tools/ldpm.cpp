// Command-line front end: grid simulation, reconstruction from report files,
// independence tests, dependency-tree learning, privacy verification, and the
// iterative bit-sampling decoder.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <omp.h>

#include "ldpm/analysis.hpp"
#include "ldpm/em.hpp"
#include "ldpm/report_io.hpp"
#include "ldpm/simulate.hpp"

namespace {

using nlohmann::json;

struct CommonOpts {
  std::string mech = "InpHT";
  int d = 8;
  int k = 2;
  double eps = 1.1;
};

struct SimulateOpts {
  CommonOpts common;
  std::vector<std::string> mechs;
  std::vector<double> epsilons;
  std::vector<uint64_t> sizes;
  uint32_t trials = 1;
  uint64_t seed = 1;
  std::string out = "results";
  std::string data;
  std::string schema;
  uint64_t source_size = 0;  // 0: twice the largest N
  std::string emit_reports;  // directory for raw report files
  bool binary_reports = false;
};

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// The chain used when no CSV is given: moderately correlated neighbours with
// alternating base rates, so no marginal is degenerate.
ldpm::ChainModel default_chain(int d) {
  ldpm::ChainModel model;
  model.base.resize(d);
  for (int i = 0; i < d; ++i) model.base[i] = (i % 2 == 0) ? 0.35 : 0.6;
  model.agree.assign(d - 1, 0.75);
  return model;
}

ldpm::Dataset load_source(const SimulateOpts& opts) {
  if (!opts.data.empty()) {
    if (!opts.schema.empty()) {
      const auto schema = ldpm::CategoricalSchema::from_json_file(opts.schema);
      return ldpm::load_csv(opts.data, schema);
    }
    return ldpm::load_csv(opts.data);
  }
  uint64_t largest = 0;
  for (uint64_t n : opts.sizes) largest = std::max(largest, n);
  const uint64_t size =
      opts.source_size != 0 ? opts.source_size : largest * 2;
  return ldpm::synth_generate(default_chain(opts.common.d), size,
                              ldpm::derive_seed(opts.seed, 0));
}

std::vector<std::pair<uint64_t, ldpm::Report>> load_reports(
    const std::string& path) {
  std::vector<std::pair<uint64_t, ldpm::Report>> reports;
  if (path.ends_with(".bin")) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open report file: " + path);
    std::vector<uint8_t> buf((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
    std::size_t offset = 0;
    while (offset < buf.size()) {
      reports.push_back(ldpm::read_report_binary(buf, offset));
    }
    return reports;
  }
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open report file: " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    reports.push_back(ldpm::report_from_jsonl(line));
  }
  return reports;
}

ldpm::Accumulator tally_reports(const std::string& path,
                                const ldpm::PrivacyParams& params) {
  auto acc = ldpm::Accumulator::make(params);
  for (const auto& [user, report] : load_reports(path)) {
    ldpm::validate_report(report, params);
    ldpm::accumulate(acc, report);
  }
  if (acc.total_reports == 0) {
    throw std::runtime_error("report file is empty: " + path);
  }
  return acc;
}

uint32_t beta_from_attrs(const std::string& attrs, int d) {
  uint32_t beta = 0;
  std::stringstream ss(attrs);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const int attr = std::stoi(part);
    if (attr < 0 || attr >= d) {
      throw std::invalid_argument("attribute index out of range");
    }
    beta |= ldpm::attribute_bit(d, attr);
  }
  if (beta == 0) throw std::invalid_argument("no attributes given");
  return beta;
}

void write_report_file(const std::string& dir, const std::string& name,
                       const std::vector<ldpm::Report>& reports, bool binary) {
  std::filesystem::create_directories(dir);
  const std::string path =
      (std::filesystem::path(dir) / (name + (binary ? ".bin" : ".jsonl")))
          .string();
  if (binary) {
    std::vector<uint8_t> buf;
    for (std::size_t u = 0; u < reports.size(); ++u) {
      ldpm::append_report_binary(buf, u, reports[u]);
    }
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size()));
    if (!out) throw std::runtime_error("cannot write " + path);
    return;
  }
  std::ofstream out(path);
  for (std::size_t u = 0; u < reports.size(); ++u) {
    out << ldpm::report_to_jsonl(u, reports[u]) << '\n';
  }
  if (!out) throw std::runtime_error("cannot write " + path);
}

int cmd_simulate(const SimulateOpts& opts) {
  ldpm::ExperimentConfig config;
  for (const auto& name : opts.mechs) {
    config.mechanisms.push_back(ldpm::mechanism_from_name(name));
  }
  config.d = opts.common.d;
  config.k = opts.common.k;
  config.epsilons = opts.epsilons;
  config.sizes = opts.sizes;
  config.trials = opts.trials;
  config.seed = opts.seed;

  const ldpm::Dataset source = load_source(opts);
  const ldpm::ExperimentResult result = ldpm::run_experiment(source, config);

  std::filesystem::create_directories(opts.out);
  const auto trials_path = std::filesystem::path(opts.out) / "trials.jsonl";
  const auto summary_path = std::filesystem::path(opts.out) / "summary.csv";

  std::ofstream trials(trials_path);
  for (const ldpm::TrialRow& row : result.trials) {
    json j;
    j["mech"] = std::string(ldpm::mechanism_name(row.mechanism));
    j["eps"] = row.epsilon;
    j["n"] = row.n;
    j["trial"] = row.trial;
    j["marginal"] = row.beta;
    j["tv"] = row.tv;
    trials << j.dump() << '\n';
  }
  if (!trials) throw std::runtime_error("cannot write " + trials_path.string());

  std::ofstream summary(summary_path);
  summary << "mech,eps,n,mean_tv,stddev_tv\n";
  for (const ldpm::GridRow& row : result.summary) {
    summary << ldpm::mechanism_name(row.mechanism) << ','
            << format_double(row.epsilon) << ',' << row.n << ','
            << format_double(row.mean_tv) << ','
            << format_double(row.stddev_tv) << '\n';
  }
  if (!summary) throw std::runtime_error("cannot write " + summary_path.string());

  if (!opts.emit_reports.empty()) {
    for (const auto& name : opts.mechs) {
      const auto mech = ldpm::mechanism_from_name(name);
      for (double eps : opts.epsilons) {
        const auto params =
            ldpm::PrivacyParams::make(mech, eps, config.d, config.k);
        for (uint64_t n : opts.sizes) {
          for (uint32_t trial = 0; trial < opts.trials; ++trial) {
            const uint64_t pop_seed = ldpm::derive_seed(config.seed, 1, n, trial);
            const uint64_t report_seed = ldpm::derive_seed(
                config.seed, 2, static_cast<uint64_t>(mech),
                std::bit_cast<uint64_t>(eps), n, trial);
            const auto population =
                ldpm::sample_population(source, n, pop_seed);
            const auto reports =
                ldpm::simulate_reports(population, params, report_seed);
            std::ostringstream name_os;
            name_os << "reports_" << name << "_eps" << eps << "_n" << n
                    << "_t" << trial;
            write_report_file(opts.emit_reports, name_os.str(), reports,
                              opts.binary_reports);
          }
        }
      }
    }
  }
  std::cout << "wrote " << trials_path.string() << " and "
            << summary_path.string() << "\n";
  return 0;
}

std::vector<ldpm::MarginalTable> pair_tables_from_acc(
    const ldpm::Accumulator& acc, const ldpm::PrivacyParams& params) {
  std::vector<ldpm::MarginalTable> tables;
  for (uint32_t beta : ldpm::kway_masks(params.d, 2)) {
    const ldpm::MarginalSpec spec(params.d, beta);
    if (params.mechanism == ldpm::Mechanism::kBS) {
      const auto em = ldpm::em_decode_marginal(acc, params, spec);
      ldpm::MarginalTable t(spec);
      t.cells = em.estimate;
      tables.push_back(std::move(t));
    } else {
      tables.push_back(ldpm::reconstruct_marginal(acc, spec, params));
    }
  }
  return tables;
}

std::vector<ldpm::MarginalTable> pair_tables_from_data(
    const ldpm::Dataset& ds) {
  const ldpm::Distribution truth = ds.empirical();
  std::vector<ldpm::MarginalTable> tables;
  for (uint32_t beta : ldpm::kway_masks(ds.d, 2)) {
    tables.push_back(
        ldpm::marginal_operator(truth, ldpm::MarginalSpec(ds.d, beta)));
  }
  return tables;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* env = std::getenv("LDPM_THREADS")) {
    const int threads = std::atoi(env);
    if (threads > 0) omp_set_num_threads(threads);
  }

  CLI::App app{"k-way marginal release under local differential privacy"};
  app.require_subcommand(1);

  // --config JSON pre-pass: values become defaults, flags still override.
  json config;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string_view(argv[i]) == "--config") {
      std::ifstream in(argv[i + 1]);
      if (!in) {
        std::cerr << "cannot open config file: " << argv[i + 1] << "\n";
        return 1;
      }
      try {
        in >> config;
      } catch (const std::exception& e) {
        std::cerr << "bad config file: " << e.what() << "\n";
        return 1;
      }
    }
  }
  auto from_config = [&config](const char* key, auto& value) {
    if (config.contains(key)) value = config.at(key).get<std::decay_t<decltype(value)>>();
  };
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file (flags override)");

  SimulateOpts sim;
  sim.mechs = {"InpHT"};
  sim.epsilons = {1.1};
  sim.sizes = {4096};
  from_config("mechanisms", sim.mechs);
  from_config("d", sim.common.d);
  from_config("k", sim.common.k);
  from_config("epsilons", sim.epsilons);
  from_config("sizes", sim.sizes);
  from_config("trials", sim.trials);
  from_config("seed", sim.seed);
  from_config("out", sim.out);
  from_config("data", sim.data);
  from_config("schema", sim.schema);
  from_config("source_size", sim.source_size);
  from_config("emit_reports", sim.emit_reports);
  from_config("binary_reports", sim.binary_reports);

  CLI::App* simulate = app.add_subcommand(
      "simulate", "run mechanisms over a grid and score marginal error");
  simulate->add_option("--config", config_path, "JSON config file (flags override)");
  simulate->add_option("--mech", sim.mechs, "mechanisms to run");
  simulate->add_option("--d", sim.common.d, "binary attributes");
  simulate->add_option("--k", sim.common.k, "marginal order");
  simulate->add_option("--eps", sim.epsilons, "privacy budgets");
  simulate->add_option("--n", sim.sizes, "population sizes");
  simulate->add_option("--trials", sim.trials, "trials per grid cell");
  simulate->add_option("--seed", sim.seed, "experiment seed");
  simulate->add_option("--out", sim.out, "output directory");
  simulate->add_option("--data", sim.data, "source CSV instead of synthesis");
  simulate->add_option("--schema", sim.schema, "categorical schema JSON");
  simulate->add_option("--source-size", sim.source_size,
                       "synthetic source population size");
  simulate->add_option("--emit-reports", sim.emit_reports,
                       "also write raw per-user report files here");
  simulate->add_flag("--binary-reports", sim.binary_reports,
                     "emit reports in the compact binary framing");

  CommonOpts common;
  from_config("mech", common.mech);
  from_config("d", common.d);
  from_config("k", common.k);
  from_config("eps", common.eps);
  std::string reports_path;
  std::string attrs;
  std::string data_path;
  std::string schema_path;
  std::string out_path;
  bool as_json = false;
  from_config("reports", reports_path);
  from_config("attrs", attrs);

  auto add_common = [&](CLI::App* cmd, bool needs_reports) {
    cmd->add_option("--config", config_path, "JSON config file (flags override)");
    cmd->add_option("--mech", common.mech, "mechanism that produced the reports");
    cmd->add_option("--d", common.d, "binary attributes");
    cmd->add_option("--k", common.k, "marginal order the reports cover");
    cmd->add_option("--eps", common.eps, "privacy budget");
    auto* opt = cmd->add_option("--reports", reports_path,
                                "report file (.jsonl or .bin)");
    if (needs_reports) opt->required();
  };

  CLI::App* reconstruct = app.add_subcommand(
      "reconstruct", "estimate one marginal from a report file");
  add_common(reconstruct, true);
  reconstruct->add_option("--attrs", attrs, "comma-separated attribute indices")
      ->required();
  reconstruct->add_option("--out", out_path, "write CSV here (default stdout)");
  reconstruct->add_flag("--json", as_json, "emit the table as one JSON line");

  CLI::App* chi2 = app.add_subcommand(
      "chi2", "pairwise independence verdict from reports or raw data");
  add_common(chi2, false);
  chi2->add_option("--attrs", attrs, "the two attribute indices")->required();
  chi2->add_option("--data", data_path, "score raw CSV instead of reports");
  chi2->add_option("--schema", schema_path, "categorical schema JSON");

  CLI::App* chowliu = app.add_subcommand(
      "chowliu", "learn a dependency tree from reports or raw data");
  add_common(chowliu, false);
  chowliu->add_option("--data", data_path,
                      "raw CSV: the truth to learn from or to re-score against");
  chowliu->add_option("--schema", schema_path, "categorical schema JSON");
  chowliu->add_option("--out", out_path, "write edges CSV here (default stdout)");
  bool as_dot = false;
  chowliu->add_flag("--dot", as_dot, "emit graphviz instead of CSV");

  CLI::App* verify = app.add_subcommand(
      "verify", "analytic worst-case log-likelihood ratio of a mechanism");
  add_common(verify, false);

  CLI::App* em = app.add_subcommand(
      "em", "iterative decode of bit-sampling reports for one marginal");
  add_common(em, true);
  em->add_option("--attrs", attrs, "comma-separated attribute indices")
      ->required();
  double omega = 1e-5;
  uint64_t max_iterations = 100000;
  em->add_option("--omega", omega, "stop when max cell change drops below");
  em->add_option("--max-iters", max_iterations, "iteration cap");
  em->add_option("--out", out_path, "write CSV here (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim);

    const auto mech = ldpm::mechanism_from_name(common.mech);
    const auto params =
        ldpm::PrivacyParams::make(mech, common.eps, common.d, common.k);

    if (verify->parsed()) {
      const double worst = ldpm::verify_ldp(params);
      json j;
      j["mech"] = common.mech;
      j["eps"] = common.eps;
      j["max_log_ratio"] = worst;
      j["satisfies_budget"] = worst <= common.eps + 1e-9;
      std::cout << j.dump() << "\n";
      return j["satisfies_budget"].get<bool>() ? 0 : 2;
    }

    if (reconstruct->parsed()) {
      const uint32_t beta = beta_from_attrs(attrs, common.d);
      const ldpm::MarginalSpec spec(common.d, beta);
      const auto acc = tally_reports(reports_path, params);
      ldpm::MarginalTable table;
      if (mech == ldpm::Mechanism::kBS) {
        throw std::invalid_argument(
            "bit-sampling reports decode iteratively; use the em subcommand");
      }
      table = ldpm::reconstruct_marginal(acc, spec, params);
      std::vector<std::string> names;
      if (as_json) {
        std::cout << ldpm::table_to_json(table, names) << "\n";
      } else if (!out_path.empty()) {
        std::ofstream out(out_path);
        ldpm::write_table_csv(out, table, names);
        if (!out) throw std::runtime_error("cannot write " + out_path);
      } else {
        ldpm::write_table_csv(std::cout, table, names);
      }
      return 0;
    }

    if (chi2->parsed()) {
      const uint32_t beta = beta_from_attrs(attrs, common.d);
      if (ldpm::popcount(beta) != 2) {
        throw std::invalid_argument("the independence test needs two attributes");
      }
      ldpm::MarginalTable table;
      uint64_t n = 0;
      if (!data_path.empty()) {
        ldpm::Dataset ds = schema_path.empty()
                               ? ldpm::load_csv(data_path)
                               : ldpm::load_csv(data_path,
                                                ldpm::CategoricalSchema::
                                                    from_json_file(schema_path));
        table = ldpm::marginal_operator(ds.empirical(),
                                        ldpm::MarginalSpec(ds.d, beta));
        n = ds.size();
      } else if (!reports_path.empty()) {
        const auto acc = tally_reports(reports_path, params);
        const ldpm::MarginalSpec spec(common.d, beta);
        if (mech == ldpm::Mechanism::kBS) {
          const auto decoded = ldpm::em_decode_marginal(acc, params, spec);
          table = ldpm::MarginalTable(spec);
          table.cells = decoded.estimate;
        } else {
          table = ldpm::reconstruct_marginal(acc, spec, params);
        }
        n = acc.total_reports;
      } else {
        throw std::invalid_argument("need --reports or --data");
      }
      const auto result = ldpm::chi_square(table, n);
      json j;
      j["statistic"] = result.statistic;
      j["critical_value"] = result.critical_value;
      j["dependent"] = result.dependent;
      j["n"] = result.n;
      std::cout << j.dump() << "\n";
      return 0;
    }

    if (chowliu->parsed()) {
      std::vector<ldpm::MarginalTable> tables;
      std::optional<ldpm::Dataset> ds;
      if (!data_path.empty()) {
        ds = schema_path.empty()
                 ? ldpm::load_csv(data_path)
                 : ldpm::load_csv(
                       data_path,
                       ldpm::CategoricalSchema::from_json_file(schema_path));
        if (ds->d != common.d) common.d = ds->d;
      }
      if (!reports_path.empty()) {
        const auto acc = tally_reports(reports_path, params);
        tables = pair_tables_from_acc(acc, params);
      } else if (ds.has_value()) {
        tables = pair_tables_from_data(*ds);
      } else {
        throw std::invalid_argument("need --reports or --data");
      }
      const auto tree = ldpm::chow_liu(common.d, tables);
      std::vector<std::string> names;
      if (ds.has_value()) names = ds->attribute_names;
      json meta;
      meta["total_mi_private"] = tree.total_weight;
      if (!reports_path.empty() && ds.has_value()) {
        meta["total_mi_true"] =
            ldpm::tree_score(tree, common.d, pair_tables_from_data(*ds));
      }
      std::cerr << meta.dump() << "\n";
      if (as_dot) {
        std::cout << ldpm::tree_to_dot(tree, names);
      } else if (!out_path.empty()) {
        std::ofstream out(out_path);
        ldpm::write_tree_csv(out, tree, names);
        if (!out) throw std::runtime_error("cannot write " + out_path);
      } else {
        ldpm::write_tree_csv(std::cout, tree, names);
      }
      return 0;
    }

    if (em->parsed()) {
      const uint32_t beta = beta_from_attrs(attrs, common.d);
      if (mech != ldpm::Mechanism::kBS) {
        throw std::invalid_argument("the em decoder expects BS reports");
      }
      const auto acc = tally_reports(reports_path, params);
      const ldpm::MarginalSpec spec(common.d, beta);
      ldpm::EmConfig config;
      config.omega = omega;
      config.max_iterations = max_iterations;
      const auto result = ldpm::em_decode_marginal(acc, params, spec, config);
      json meta;
      meta["iterations"] = result.iterations;
      meta["converged"] = result.converged;
      meta["degenerate"] = result.degenerate;
      std::cerr << meta.dump() << "\n";
      ldpm::MarginalTable table(spec);
      table.cells = result.estimate;
      std::vector<std::string> names;
      if (!out_path.empty()) {
        std::ofstream out(out_path);
        ldpm::write_table_csv(out, table, names);
        if (!out) throw std::runtime_error("cannot write " + out_path);
      } else {
        ldpm::write_table_csv(std::cout, table, names);
      }
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
