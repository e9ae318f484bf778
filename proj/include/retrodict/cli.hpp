// Copyright (c) 2026 The retrodict developers.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdlib>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "retrodict/device_model.hpp"
#include "retrodict/evolution.hpp"
#include "retrodict/experiment_sim.hpp"
#include "retrodict/io.hpp"
#include "retrodict/operator_core.hpp"
#include "retrodict/probability_engine.hpp"
#include "retrodict/scenarios.hpp"

namespace retrodict {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitUnexpected = 1,
  kExitUsage = 2,
  kExitIo = 3,
  kExitSyntax = 4,
  kExitSchema = 5,
  kExitValidation = 6,
  kExitCheckFailed = 7,
};

namespace cli_detail {

/// Everything a device file can supply, validated and ready to use. Missing
/// devices are derived from the scenario when one is present.
struct Materialized {
  ParsedDeviceFile parsed;
  std::optional<DeviceOperatorSet> prep;
  std::optional<DeviceOperatorSet> meas;
  std::optional<EvolutionContext> evolution;
  std::optional<BelinfanteScenario> scenario;
  bool derived_from_scenario = false;
};

inline Materialized materialize(const std::string& path,
                                const ParseOptions& popts,
                                const Tolerances& tol, std::ostream& err) {
  Materialized m{load_device_file(path, popts), {}, {}, {}, {}, false};
  for (const std::string& w : m.parsed.warnings)
    err << "warning: " << w << '\n';
  const DeviceFile& f = m.parsed.file;
  if (f.scenario)
    m.scenario = BelinfanteScenario::validate(
        f.scenario->rho_g, f.scenario->a_basis, f.scenario->b_basis, tol);
  if (f.preparation)
    m.prep = DeviceOperatorSet::build(DeviceRole::Preparation, *f.preparation,
                                      tol);
  if (f.measurement)
    m.meas = DeviceOperatorSet::build(DeviceRole::Measurement, *f.measurement,
                                      tol);
  if ((!m.prep || !m.meas) && m.scenario) {
    BelinfanteDevices dev = belinfante_devices(*m.scenario, tol);
    if (!m.prep) {
      m.prep = std::move(dev.preparation);
      m.derived_from_scenario = true;
    }
    if (!m.meas) {
      m.meas = std::move(dev.measurement);
      m.derived_from_scenario = true;
    }
  }
  if (f.evolution)
    m.evolution = EvolutionContext(UnitaryMap::validate(f.evolution->unitary,
                                                        tol),
                                   f.evolution->t_prepare,
                                   f.evolution->t_measure);
  return m;
}

inline const DeviceOperatorSet& need_prep(const Materialized& m) {
  if (!m.prep)
    throw ValidationError(
        "the file provides no preparation device and no scenario to derive "
        "one from");
  return *m.prep;
}

inline const DeviceOperatorSet& need_meas(const Materialized& m) {
  if (!m.meas)
    throw ValidationError(
        "the file provides no measurement device and no scenario to derive "
        "one from");
  return *m.meas;
}

inline const EvolutionContext& need_evolution(const Materialized& m) {
  if (!m.evolution)
    throw ValidationError("the file provides no evolution block");
  return *m.evolution;
}

inline const BelinfanteScenario& need_scenario(const Materialized& m) {
  if (!m.scenario)
    throw ValidationError("the file provides no scenario block");
  return *m.scenario;
}

/// Number of worker threads: the chunk count, capped by RETRODICT_THREADS
/// (or the hardware concurrency when the variable is unset).
inline int thread_budget(int chunks) {
  int cap = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* v = std::getenv("RETRODICT_THREADS")) {
    char* end = nullptr;
    const long parsed = std::strtol(v, &end, 10);
    if (end != v && parsed >= 1 && parsed <= 4096)
      cap = static_cast<int>(parsed);
  }
  return std::max(1, std::min(chunks, cap));
}

inline const char* bool_str(bool v) { return v ? "true" : "false"; }

inline Json json_device_summary(const DeviceOperatorSet& dev,
                                const Tolerances& tol) {
  const BiasReport bias = classify_bias(dev, tol);
  Json j;
  j["labels"] = dev.labels();
  j["dimension"] = static_cast<std::int64_t>(dev.dim());
  j["trace_total"] = trace(dev.total());
  j["admission_scale"] = dev.admission_scale();
  j["bias"] = json_bias(bias);
  return j;
}

inline Json json_evolution_summary(const EvolutionContext& ctx) {
  Json j;
  j["t_prepare"] = ctx.t_prepare();
  j["t_measure"] = ctx.t_measure();
  j["unitarity_defect"] = ctx.u().unitarity_defect();
  return j;
}

inline Json json_scenario_summary(const BelinfanteScenario& s,
                                  const Tolerances& tol) {
  Json j;
  j["labels"] = s.labels();
  Json weights = Json::array();
  for (std::size_t i = 0; i < s.labels().size(); ++i)
    weights.push_back(s.weight(i));
  j["weights"] = std::move(weights);
  j["uniform"] =
      proportionality_to_identity(s.rho_g().op(), tol).has_value();
  return j;
}

inline Json json_overlaps(const BelinfanteScenario& s) {
  const std::size_t d = s.labels().size();
  Eigen::MatrixXd overlaps(static_cast<Eigen::Index>(d),
                           static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      overlaps(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          s.overlap(i, j);
  return json_matrix(overlaps);
}

inline void write_csv_matrix(std::ostream& os, const std::string& corner,
                             const std::vector<std::string>& row_labels,
                             const std::vector<std::string>& col_labels,
                             const Eigen::MatrixXd& m) {
  os << detail::csv_escape(corner);
  for (const std::string& l : col_labels) os << ',' << detail::csv_escape(l);
  os << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    os << detail::csv_escape(row_labels[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      os << ',' << format_double(m(i, j));
    os << '\n';
  }
}

}  // namespace cli_detail

/// Runs the command-line tool against explicit streams; returns the process
/// exit code. `argv` must include the program name at index 0.
inline int run_cli(int argc, const char* const* argv, std::ostream& out,
                   std::ostream& err) {
  struct Ctx {
    std::string file;
    std::string out_path;
    std::string format;
    bool lenient = false;
    Tolerances tol;
    std::int64_t sim_trials = 100000;
    std::int64_t rep_trials = 10000;
    std::uint64_t seed = 1;
    int sim_chunks = 1;
    int rep_chunks = 4;
    std::string log_out;
  } c;

  CLI::App app{
      "Prepare-and-measure probability toolkit: joint, predictive and "
      "retrodictive distributions for labeled device operators."};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* sub, bool with_format) {
    sub->add_option("file", c.file, "device file (JSON)")->required();
    sub->add_option("-o,--out", c.out_path,
                    "write the result to this path instead of stdout");
    if (with_format)
      sub->add_option("--format", c.format, "output format")
          ->check(CLI::IsMember({"csv", "json"}));
    sub->add_flag("--lenient", c.lenient,
                  "tolerate unknown device-file fields");
    sub->add_option("--tol-herm", c.tol.hermitian, "Hermiticity tolerance")
        ->check(CLI::PositiveNumber);
    sub->add_option("--tol-psd", c.tol.psd,
                    "positive-semidefiniteness tolerance")
        ->check(CLI::PositiveNumber);
    sub->add_option("--tol-unitary", c.tol.unitary, "unitarity tolerance")
        ->check(CLI::PositiveNumber);
    sub->add_option("--tol-prop", c.tol.proportionality,
                    "identity-proportionality tolerance")
        ->check(CLI::PositiveNumber);
    sub->add_option("--tol-denom", c.tol.denominator,
                    "degenerate-denominator tolerance")
        ->check(CLI::PositiveNumber);
  };

  CLI::App* cmd_validate = app.add_subcommand(
      "validate", "check every block of a device file and summarize it");
  add_common(cmd_validate, false);

  CLI::App* cmd_classify = app.add_subcommand(
      "classify", "report whether each device is biased or unbiased");
  add_common(cmd_classify, true);

  CLI::App* cmd_joint = app.add_subcommand(
      "joint", "joint outcome distribution of the device pair");
  add_common(cmd_joint, true);

  CLI::App* cmd_predict = app.add_subcommand(
      "predict", "probability of each measurement outcome given the "
                 "preparation");
  add_common(cmd_predict, true);

  CLI::App* cmd_retrodict = app.add_subcommand(
      "retrodict", "probability of each preparation outcome given the "
                   "measurement");
  add_common(cmd_retrodict, true);

  CLI::App* cmd_evolve = app.add_subcommand(
      "evolve-retrodict",
      "retrodiction across unitary evolution, computed along both time "
      "directions");
  add_common(cmd_evolve, true);

  CLI::App* cmd_belinfante = app.add_subcommand(
      "belinfante",
      "closed-form retrodiction for the basis-source scenario, with the "
      "squared-overlap comparison");
  add_common(cmd_belinfante, true);

  CLI::App* cmd_appendix = app.add_subcommand(
      "appendix-check",
      "compare the direct joint distribution with the two-step "
      "extended-measurement story");
  add_common(cmd_appendix, true);

  CLI::App* cmd_simulate = app.add_subcommand(
      "simulate", "sample prepare-and-measure trials and tabulate them");
  add_common(cmd_simulate, true);
  cmd_simulate->add_option("--trials", c.sim_trials, "number of trials")
      ->check(CLI::Range(std::int64_t{1}, std::int64_t{1000000000}))
      ->capture_default_str();
  cmd_simulate->add_option("--seed", c.seed, "root seed")
      ->capture_default_str();
  cmd_simulate
      ->add_option("--chunks", c.sim_chunks,
                   "number of work chunks (never changes the outcome)")
      ->check(CLI::Range(1, 1048576))
      ->capture_default_str();
  cmd_simulate->add_option("--log-out", c.log_out,
                           "also write the per-trial event log (CSV) here");

  CLI::App* cmd_report = app.add_subcommand(
      "report",
      "one JSON document with distributions, simulation and every "
      "cross-check");
  add_common(cmd_report, false);
  cmd_report->add_option("--trials", c.rep_trials, "number of trials")
      ->check(CLI::Range(std::int64_t{1}, std::int64_t{1000000000}))
      ->capture_default_str();
  cmd_report->add_option("--seed", c.seed, "root seed")
      ->capture_default_str();
  cmd_report
      ->add_option("--chunks", c.rep_chunks,
                   "number of work chunks (never changes the outcome)")
      ->check(CLI::Range(1, 1048576))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const ParseOptions popts{c.lenient};

  try {
    std::ofstream file_sink;
    if (!c.out_path.empty()) {
      file_sink.open(c.out_path, std::ios::binary);
      if (!file_sink)
        throw FileError("cannot open \"" + c.out_path + "\" for writing");
    }
    std::ostream& sink = c.out_path.empty() ? out : file_sink;

    const cli_detail::Materialized m =
        cli_detail::materialize(c.file, popts, c.tol, err);

    // -- validate ---------------------------------------------------------
    if (app.got_subcommand(cmd_validate)) {
      Json doc;
      doc["file"] = c.file;
      doc["dimension"] = static_cast<std::int64_t>(m.parsed.file.dimension);
      doc["preparation"] =
          m.prep ? cli_detail::json_device_summary(*m.prep, c.tol)
                 : Json(nullptr);
      doc["measurement"] =
          m.meas ? cli_detail::json_device_summary(*m.meas, c.tol)
                 : Json(nullptr);
      doc["evolution"] = m.evolution
                             ? cli_detail::json_evolution_summary(*m.evolution)
                             : Json(nullptr);
      doc["scenario"] = m.scenario ? cli_detail::json_scenario_summary(
                                         *m.scenario, c.tol)
                                   : Json(nullptr);
      doc["derived_from_scenario"] = m.derived_from_scenario;
      doc["warnings"] = m.parsed.warnings;
      doc["status"] = "ok";
      sink << doc.dump(2) << '\n';
      return kExitOk;
    }

    // -- classify ---------------------------------------------------------
    if (app.got_subcommand(cmd_classify)) {
      if (!m.prep && !m.meas)
        throw ValidationError("the file provides no devices to classify");
      const std::string fmt = c.format.empty() ? "csv" : c.format;
      if (fmt == "csv") {
        sink << "device,unbiased,gamma,deviation\n";
        auto emit_row = [&](const char* name, const DeviceOperatorSet& dev) {
          const BiasReport b = classify_bias(dev, c.tol);
          sink << name << ',' << cli_detail::bool_str(b.is_unbiased) << ','
               << (b.gamma ? format_double(*b.gamma) : std::string()) << ','
               << format_double(b.deviation) << '\n';
        };
        if (m.prep) emit_row("preparation", *m.prep);
        if (m.meas) emit_row("measurement", *m.meas);
      } else {
        Json doc;
        doc["preparation"] =
            m.prep ? json_bias(classify_bias(*m.prep, c.tol)) : Json(nullptr);
        doc["measurement"] =
            m.meas ? json_bias(classify_bias(*m.meas, c.tol)) : Json(nullptr);
        sink << doc.dump(2) << '\n';
      }
      return kExitOk;
    }

    // -- joint / predict / retrodict ---------------------------------------
    if (app.got_subcommand(cmd_joint) || app.got_subcommand(cmd_predict) ||
        app.got_subcommand(cmd_retrodict)) {
      const DeviceOperatorSet& prep = cli_detail::need_prep(m);
      const DeviceOperatorSet& meas = cli_detail::need_meas(m);
      const JointDistribution jd = joint(prep, meas, c.tol);
      const ConditionalTable pred = predictive(jd, c.tol);
      const ConditionalTable retr = retrodictive(jd, c.tol);
      const double bayes = bayes_deviation(jd, pred, retr);
      if (bayes > kBayesTolerance)
        throw CrossCheckFailure(
            "the factorized forms do not rebuild the joint distribution "
            "(deviation " + detail::fmt_real(bayes) + ")");
      const double rows =
          std::max(row_sum_deviation(pred), row_sum_deviation(retr));
      if (rows > kBayesTolerance)
        throw CrossCheckFailure("a conditional row does not sum to 1 "
                                "(deviation " + detail::fmt_real(rows) + ")");
      const std::string fmt = c.format.empty() ? "csv" : c.format;
      if (app.got_subcommand(cmd_joint)) {
        if (fmt == "csv")
          write_csv_joint(sink, jd);
        else
          sink << json_joint(jd).dump(2) << '\n';
      } else {
        const ConditionalTable& t =
            app.got_subcommand(cmd_predict) ? pred : retr;
        if (fmt == "csv")
          write_csv_conditional(sink, t);
        else
          sink << json_conditional(t).dump(2) << '\n';
      }
      return kExitOk;
    }

    // -- evolve-retrodict ---------------------------------------------------
    if (app.got_subcommand(cmd_evolve)) {
      const DeviceOperatorSet& prep = cli_detail::need_prep(m);
      const DeviceOperatorSet& meas = cli_detail::need_meas(m);
      const EvolutionContext& ctx = cli_detail::need_evolution(m);
      const ConditionalTable fwd = retrodict_forward(ctx, prep, meas, c.tol);
      const ConditionalTable bwd = retrodict_backward(ctx, prep, meas, c.tol);
      const double diff = table_deviation(fwd, bwd);
      const bool agrees = diff <= kEvolutionAgreementTolerance;
      const std::string fmt = c.format.empty() ? "json" : c.format;
      if (fmt == "json") {
        Json doc;
        doc["forward"] = json_conditional(fwd);
        doc["backward"] = json_conditional(bwd);
        doc["max_difference"] = diff;
        doc["agrees"] = agrees;
        sink << doc.dump(2) << '\n';
      } else {
        sink << "section,forward\n";
        write_csv_conditional(sink, fwd);
        sink << "\nsection,backward\n";
        write_csv_conditional(sink, bwd);
        sink << "\nmax_difference," << format_double(diff) << "\nagrees,"
             << cli_detail::bool_str(agrees) << '\n';
      }
      if (!agrees)
        throw CrossCheckFailure(
            "forward and backward retrodiction disagree by " +
            detail::fmt_real(diff));
      return kExitOk;
    }

    // -- belinfante ----------------------------------------------------------
    if (app.got_subcommand(cmd_belinfante)) {
      const BelinfanteScenario& s = cli_detail::need_scenario(m);
      const ConditionalTable table = belinfante_retrodictive(s, c.tol);
      const BelinfanteOverlapReport rep = belinfante_overlap_check(s, c.tol);
      const std::string fmt = c.format.empty() ? "json" : c.format;
      if (fmt == "json") {
        Json doc;
        doc["labels"] = s.labels();
        Json weights = Json::array();
        for (std::size_t i = 0; i < s.labels().size(); ++i)
          weights.push_back(s.weight(i));
        doc["weights"] = std::move(weights);
        doc["retrodictive"] = json_conditional(table);
        doc["overlaps"] = cli_detail::json_overlaps(s);
        doc["overlap_deviation"] = rep.max_deviation;
        doc["uniform"] = rep.uniform;
        doc["consistent"] = rep.consistent;
        sink << doc.dump(2) << '\n';
      } else {
        write_csv_conditional(sink, table);
        sink << "\noverlap_deviation," << format_double(rep.max_deviation)
             << "\nuniform," << cli_detail::bool_str(rep.uniform)
             << "\nconsistent," << cli_detail::bool_str(rep.consistent)
             << '\n';
      }
      if (!rep.consistent)
        throw CrossCheckFailure(
            "a uniform weight state must make retrodiction match the "
            "squared overlaps, but the deviation is " +
            detail::fmt_real(rep.max_deviation));
      return kExitOk;
    }

    // -- appendix-check ------------------------------------------------------
    if (app.got_subcommand(cmd_appendix)) {
      const DeviceOperatorSet& prep = cli_detail::need_prep(m);
      const DeviceOperatorSet& meas = cli_detail::need_meas(m);
      const EquivalenceReport rep = appendix_equivalence(prep, meas, c.tol);
      const bool ok = rep.max_deviation <= kTwoStepTolerance;
      const std::string fmt = c.format.empty() ? "json" : c.format;
      if (fmt == "json") {
        Json doc;
        doc["prepared"] = rep.prep_labels;
        doc["observed"] = rep.meas_labels;
        doc["restricted"] = json_matrix(rep.restricted);
        doc["direct"] = json_matrix(rep.direct);
        doc["max_deviation"] = rep.max_deviation;
        doc["null_mass"] = rep.null_mass;
        doc["within_tolerance"] = ok;
        sink << doc.dump(2) << '\n';
      } else {
        sink << "section,restricted\n";
        cli_detail::write_csv_matrix(sink, "prepared", rep.prep_labels,
                                     rep.meas_labels, rep.restricted);
        sink << "\nsection,direct\n";
        cli_detail::write_csv_matrix(sink, "prepared", rep.prep_labels,
                                     rep.meas_labels, rep.direct);
        sink << "\nmax_deviation," << format_double(rep.max_deviation)
             << "\nnull_mass," << format_double(rep.null_mass)
             << "\nwithin_tolerance," << cli_detail::bool_str(ok) << '\n';
      }
      if (!ok)
        throw CrossCheckFailure(
            "the two-step story deviates from the direct joint distribution "
            "by " + detail::fmt_real(rep.max_deviation));
      return kExitOk;
    }

    // -- simulate ------------------------------------------------------------
    if (app.got_subcommand(cmd_simulate)) {
      const DeviceOperatorSet& prep = cli_detail::need_prep(m);
      const DeviceOperatorSet& meas = cli_detail::need_meas(m);
      const int threads = cli_detail::thread_budget(c.sim_chunks);
      const ExperimentLog log = run_experiment(
          prep, meas, c.sim_trials, RngSeed{c.seed}, c.sim_chunks, threads,
          c.tol);
      if (!c.log_out.empty()) {
        std::ofstream log_file(c.log_out, std::ios::binary);
        if (!log_file)
          throw FileError("cannot open \"" + c.log_out + "\" for writing");
        write_csv_log(log_file, log);
      }
      const FrequencyTable ft = tabulate(log, prep, meas, c.tol);
      const std::string fmt = c.format.empty() ? "csv" : c.format;
      if (fmt == "csv") {
        write_csv_frequency(sink, ft);
      } else {
        Json doc = json_frequency(ft);
        doc["trials"] = c.sim_trials;
        doc["seed"] = c.seed;
        sink << doc.dump(2) << '\n';
      }
      return kExitOk;
    }

    // -- report --------------------------------------------------------------
    if (app.got_subcommand(cmd_report)) {
      const DeviceOperatorSet& prep = cli_detail::need_prep(m);
      const DeviceOperatorSet& meas = cli_detail::need_meas(m);

      const JointDistribution jd = joint(prep, meas, c.tol);
      const ConditionalTable pred = predictive(jd, c.tol);
      const ConditionalTable retr = retrodictive(jd, c.tol);
      const double bayes = bayes_deviation(jd, pred, retr);
      const double rows =
          std::max(row_sum_deviation(pred), row_sum_deviation(retr));
      const EquivalenceReport equiv = appendix_equivalence(prep, meas, c.tol);

      Json doc;
      doc["file"] = c.file;
      doc["dimension"] = static_cast<std::int64_t>(prep.dim());
      doc["preparation"] = cli_detail::json_device_summary(prep, c.tol);
      doc["measurement"] = cli_detail::json_device_summary(meas, c.tol);
      doc["derived_from_scenario"] = m.derived_from_scenario;

      Json apriori;
      apriori["labels"] = prep.labels();
      apriori["p"] = a_priori_distribution(prep);
      doc["a_priori"] = std::move(apriori);
      doc["joint"] = json_joint(jd);
      doc["predictive"] = json_conditional(pred);
      doc["retrodictive"] = json_conditional(retr);

      bool pass = bayes <= kBayesTolerance && rows <= kBayesTolerance &&
                  equiv.max_deviation <= kTwoStepTolerance;

      if (m.evolution) {
        const ConditionalTable fwd =
            retrodict_forward(*m.evolution, prep, meas, c.tol);
        const ConditionalTable bwd =
            retrodict_backward(*m.evolution, prep, meas, c.tol);
        const double diff = table_deviation(fwd, bwd);
        Json ev = cli_detail::json_evolution_summary(*m.evolution);
        ev["retrodictive"] = json_conditional(fwd);
        ev["max_difference"] = diff;
        ev["agrees"] = diff <= kEvolutionAgreementTolerance;
        doc["evolution"] = std::move(ev);
        pass = pass && diff <= kEvolutionAgreementTolerance;
      } else {
        doc["evolution"] = nullptr;
      }

      if (m.scenario) {
        const ConditionalTable table =
            belinfante_retrodictive(*m.scenario, c.tol);
        const BelinfanteOverlapReport rep =
            belinfante_overlap_check(*m.scenario, c.tol);
        Json sc = cli_detail::json_scenario_summary(*m.scenario, c.tol);
        sc["retrodictive"] = json_conditional(table);
        sc["overlaps"] = cli_detail::json_overlaps(*m.scenario);
        sc["overlap_deviation"] = rep.max_deviation;
        sc["consistent"] = rep.consistent;
        doc["scenario"] = std::move(sc);
        pass = pass && rep.consistent;
      } else {
        doc["scenario"] = nullptr;
      }

      const int threads = cli_detail::thread_budget(c.rep_chunks);
      const ExperimentLog log = run_experiment(
          prep, meas, c.rep_trials, RngSeed{c.seed}, c.rep_chunks, threads,
          c.tol);
      const FrequencyTable ft = tabulate(log, prep, meas, c.tol);
      Json sim = json_frequency(ft);
      sim["trials"] = c.rep_trials;
      sim["seed"] = c.seed;
      doc["simulation"] = std::move(sim);

      Json checks;
      checks["bayes_consistency"] = Json{{"max_deviation", bayes},
                                         {"tolerance", kBayesTolerance},
                                         {"pass", bayes <= kBayesTolerance}};
      checks["conditional_row_sums"] =
          Json{{"max_deviation", rows},
               {"tolerance", kBayesTolerance},
               {"pass", rows <= kBayesTolerance}};
      checks["two_step_equivalence"] =
          Json{{"max_deviation", equiv.max_deviation},
               {"tolerance", kTwoStepTolerance},
               {"pass", equiv.max_deviation <= kTwoStepTolerance}};
      doc["checks"] = std::move(checks);
      doc["status"] = pass ? "pass" : "fail";
      sink << doc.dump(2) << '\n';
      return pass ? kExitOk : kExitCheckFailed;
    }

    err << "error: no command handled\n";
    return kExitUnexpected;
  } catch (const SyntaxError& e) {
    err << "syntax error: " << e.what() << '\n';
    return kExitSyntax;
  } catch (const SchemaError& e) {
    err << "schema error: " << e.what() << '\n';
    return kExitSchema;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << '\n';
    return kExitIo;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitCheckFailed;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUnexpected;
  }
}

/// Convenience overload for tests: arguments without the program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out,
                   std::ostream& err) {
  std::vector<std::string> full;
  full.reserve(args.size() + 1);
  full.push_back("retrodict");
  full.insert(full.end(), args.begin(), args.end());
  std::vector<const char*> ptrs;
  ptrs.reserve(full.size());
  for (const std::string& s : full) ptrs.push_back(s.c_str());
  return run_cli(static_cast<int>(ptrs.size()), ptrs.data(), out, err);
}

}  // namespace retrodict
