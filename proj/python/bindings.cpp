#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <numeric>

#include "oscid/error.hpp"
#include "oscid/pipeline.hpp"
#include "oscid/stacking.hpp"

namespace py = pybind11;
using namespace oscid;

namespace {

TruncationRule make_rule(std::optional<Eigen::Index> rank, std::optional<double> energy,
                         std::optional<double> sv_ratio) {
  const int given = rank.has_value() + energy.has_value() + sv_ratio.has_value();
  if (given > 1) throw Error(ErrorCode::invalid_argument, "give at most one of rank, energy, sv_ratio");
  if (rank) return TruncationRule::fixed_rank(*rank);
  if (sv_ratio) return TruncationRule::singular_value_ratio(*sv_ratio);
  return TruncationRule::energy_fraction(energy.value_or(0.9999));
}

py::dict record_dict(const SignalRecord& record) {
  py::dict channels;
  py::dict missing;
  for (const auto& channel : record.channels()) {
    channels[py::str(channel.name)] =
        Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(channel.values.data(),
                                                          static_cast<Eigen::Index>(channel.values.size())));
    missing[py::str(channel.name)] = py::cast(channel.missing);
  }
  py::dict out;
  out["dt"] = record.dt();
  out["t0"] = record.t0();
  out["channels"] = channels;
  out["missing"] = missing;
  return out;
}

py::dict mode_dict(const ModeReport& m) {
  py::dict d;
  d["rank"] = m.dominant_rank;
  d["level"] = m.level;
  d["bin"] = m.bin;
  d["index"] = m.mode_index;
  d["lambda"] = m.lambda;
  d["omega"] = m.omega;
  d["frequency_hz"] = m.frequency_hz;
  d["growth_rate"] = m.growth_rate;
  d["damping"] = std::string(to_string(m.damping));
  d["amplitude"] = m.amplitude;
  d["integral_contribution"] = m.integral_contribution;
  d["pair"] = m.pair;
  d["slow"] = m.slow;
  d["reliable"] = m.reliable;
  return d;
}

py::list ranked(std::vector<ModeReport> modes) {
  std::sort(modes.begin(), modes.end(),
            [](const ModeReport& a, const ModeReport& b) { return a.dominant_rank < b.dominant_rank; });
  py::list out;
  for (const auto& m : modes) out.append(mode_dict(m));
  return out;
}

py::dict plan_dict(const MrdmdPlan& p) {
  py::list levels;
  for (const auto& l : p.per_level) {
    py::dict d;
    d["level"] = l.level;
    d["bins"] = l.bins;
    d["bin_size"] = l.bin_size.str();
    d["bin_duration_s"] = l.bin_duration.str();
    d["subsample_hz"] = l.subsample_hz.str();
    d["max_capturable_hz"] = l.max_capturable_hz.str();
    d["max_slow_hz"] = l.max_slow_hz.str();
    levels.append(d);
  }
  py::dict d;
  d["mu"] = p.mu;
  d["levels"] = p.levels;
  d["g"] = p.g.str();
  d["rho"] = p.rho;
  d["n"] = p.n;
  d["dt"] = p.dt.str();
  d["window_s"] = p.window.str();
  d["per_level"] = levels;
  return d;
}

GeneratorConfig generator_from(const py::dict& spec) {
  GeneratorConfig config;
  if (spec.contains("modes")) {
    for (const auto& item : spec["modes"]) {
      const auto mode = item.cast<py::dict>();
      config.modes.push_back({mode["frequency_hz"].cast<double>(), mode["growth_rate"].cast<double>(),
                              mode["amplitude"].cast<double>(),
                              mode.contains("phase") ? mode["phase"].cast<double>() : 0.0});
    }
  }
  if (spec.contains("dc")) config.dc = spec["dc"].cast<double>();
  if (spec.contains("sample_rate_hz")) config.sample_rate_hz = spec["sample_rate_hz"].cast<double>();
  if (spec.contains("duration_s")) config.duration_s = spec["duration_s"].cast<double>();
  if (spec.contains("noise_std")) config.noise_std = spec["noise_std"].cast<double>();
  if (spec.contains("seed")) config.seed = spec["seed"].cast<std::uint64_t>();
  if (spec.contains("channel")) config.channel = spec["channel"].cast<std::string>();
  return config;
}

py::dict generator_dict(const GeneratorConfig& config) {
  py::list modes;
  for (const auto& m : config.modes) {
    py::dict d;
    d["frequency_hz"] = m.frequency_hz;
    d["growth_rate"] = m.growth_rate;
    d["amplitude"] = m.amplitude;
    d["phase"] = m.phase;
    modes.append(d);
  }
  py::dict d;
  d["modes"] = modes;
  d["dc"] = config.dc;
  d["sample_rate_hz"] = config.sample_rate_hz;
  d["duration_s"] = config.duration_s;
  d["noise_std"] = config.noise_std;
  d["seed"] = config.seed;
  d["channel"] = config.channel;
  return d;
}

}  // namespace

PYBIND11_MODULE(_oscid, m) {
  m.doc() = "DMD and multi-resolution DMD oscillation-mode identification";

  static py::exception<Error> error(m, "Error", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, (std::string(to_string(e.code())) + ": " + e.what()).c_str());
    }
  });

  m.def("profile_names", &profile_names);
  m.def("profile", [](const std::string& name) { return generator_dict(profile(name)); }, py::arg("name"),
        "Generator settings of a named profile, as accepted by generate().");
  m.def("generate", [](const py::dict& spec) { return record_dict(generate(generator_from(spec))); },
        py::arg("spec"));

  m.def(
      "load_csv",
      [](const std::filesystem::path& path, bool header, bool time_column, std::optional<double> dt, double t0,
         const std::string& fill) {
        IngestConfig config;
        config.header = header;
        config.time_column = time_column;
        config.dt = dt;
        config.t0 = t0;
        config.fill = parse_fill_policy(fill);
        return record_dict(load_csv(path, config));
      },
      py::arg("path"), py::kw_only(), py::arg("header") = true, py::arg("time_column") = false,
      py::arg("dt") = py::none(), py::arg("t0") = 0.0, py::arg("fill") = "zero");

  m.def(
      "delay_embed",
      [](const Eigen::MatrixXd& signals, std::size_t depth) {
        // One row per channel; a 1-D array arrives as a single column.
        const Eigen::MatrixXd rows = signals.cols() == 1 ? Eigen::MatrixXd(signals.transpose()) : signals;
        std::vector<Channel> channels;
        std::vector<std::string> names;
        for (Eigen::Index c = 0; c < rows.rows(); ++c) {
          names.push_back("c" + std::to_string(c));
          channels.push_back({names.back(), std::vector<double>(rows.row(c).begin(), rows.row(c).end()), {}});
        }
        const SignalRecord record(std::move(channels), 1.0);
        return delay_embed_joint(record, names, depth).data;
      },
      py::arg("signals"), py::arg("depth"),
      "Hankel (or block-Hankel for several rows) embedding with `depth` delays.");

  py::class_<DmdResult>(m, "DmdResult")
      .def_readonly("modes", &DmdResult::modes)
      .def_readonly("eigenvalues", &DmdResult::eigenvalues)
      .def_readonly("amplitudes", &DmdResult::amplitudes)
      .def_readonly("rank", &DmdResult::rank)
      .def_readonly("dt", &DmdResult::dt)
      .def_readonly("singular_values", &DmdResult::singular_values)
      .def_readonly("rank_clamped", &DmdResult::rank_clamped)
      .def("reconstruct", &reconstruct_window, py::arg("columns"));

  m.def(
      "dmd",
      [](const Eigen::MatrixXd& x1, const Eigen::MatrixXd& x2, double dt, std::optional<Eigen::Index> rank,
         std::optional<double> energy, std::optional<double> sv_ratio) {
        return dmd(x1, x2, make_rule(rank, energy, sv_ratio), dt);
      },
      py::arg("x1"), py::arg("x2"), py::arg("dt"), py::kw_only(), py::arg("rank") = py::none(),
      py::arg("energy") = py::none(), py::arg("sv_ratio") = py::none());

  m.def(
      "describe_modes",
      [](const DmdResult& result, std::size_t horizon_steps, double critical_band) {
        std::vector<Eigen::Index> all(static_cast<std::size_t>(result.eigenvalues.size()));
        std::iota(all.begin(), all.end(), Eigen::Index{0});
        auto modes = describe_modes(result, 1, 0, 1.0 / result.dt, horizon_steps, all);
        classify(modes, critical_band);
        return ranked(std::move(modes));
      },
      py::arg("result"), py::arg("horizon_steps"), py::arg("critical_band") = kDefaultCriticalBand,
      "Classified modes of a single-window DMD, dominant first.");

  m.def(
      "plan",
      [](std::int64_t n, double dt, int mu, const std::string& g, std::optional<int> levels) {
        return plan_dict(plan(n, dt, mu, Rational::parse(g), levels));
      },
      py::arg("n"), py::arg("dt"), py::arg("mu") = 16, py::arg("g") = "4", py::arg("levels") = py::none());

  m.def(
      "mrdmd",
      [](const Eigen::MatrixXd& snapshots, double dt, int mu, const std::string& g, std::optional<int> levels,
         std::optional<Eigen::Index> rank, std::optional<double> energy, std::optional<double> sv_ratio,
         Eigen::Index delay_stride, unsigned threads, double critical_band) {
        DecomposeOptions options;
        options.rule = make_rule(rank, energy, sv_ratio);
        options.delay_stride = delay_stride;
        options.threads = threads;
        options.critical_band = critical_band;
        MrdmdResult result;
        {
          py::gil_scoped_release release;
          result = decompose(snapshots, dt, plan(snapshots.cols(), dt, mu, Rational::parse(g), levels), options);
        }
        py::dict out;
        out["plan"] = plan_dict(result.plan);
        out["levels"] = result.per_level_reconstruction;
        out["total"] = result.total_reconstruction;
        out["modes"] = ranked(result.modes);
        return out;
      },
      py::arg("snapshots"), py::arg("dt"), py::kw_only(), py::arg("mu") = 16, py::arg("g") = "4",
      py::arg("levels") = py::none(), py::arg("rank") = py::none(), py::arg("energy") = py::none(),
      py::arg("sv_ratio") = py::none(), py::arg("delay_stride") = 0, py::arg("threads") = 1,
      py::arg("critical_band") = kDefaultCriticalBand,
      "Multi-resolution decomposition of a snapshot matrix. delay_stride > 0 enables alias correction.");

  m.def(
      "analyze",
      [](const std::string& method, const std::filesystem::path& output_dir,
         std::optional<std::filesystem::path> input, std::optional<std::string> profile_name,
         std::optional<std::string> channel, bool joint, std::optional<std::size_t> stack,
         std::optional<Eigen::Index> rank, std::optional<double> energy, std::optional<double> sv_ratio, int mu,
         const std::string& g, std::optional<int> termination_level, double critical_band,
         std::optional<std::uint64_t> seed, std::optional<double> noise, std::size_t gap_start,
         std::size_t gap_length, bool time_column, std::optional<double> dt, unsigned threads, bool dealias) {
        RunConfig config;
        config.input = input;
        config.profile = profile_name;
        config.channel = channel;
        config.joint = joint;
        config.stack_depth = stack;
        config.rule = make_rule(rank, energy, sv_ratio);
        config.mu = mu;
        config.g = Rational::parse(g);
        config.termination_level = termination_level;
        config.critical_band = critical_band;
        config.seed = seed;
        config.noise_std = noise;
        config.gap_start = gap_start;
        config.gap_length = gap_length;
        config.ingest.time_column = time_column;
        config.ingest.dt = dt;
        config.output_dir = output_dir;
        config.threads = threads;
        config.dealias = dealias;
        py::gil_scoped_release release;
        if (method == "dmd") return run_dmd(config);
        if (method == "mrdmd") return run_mrdmd(config);
        if (method == "compare") return run_compare(config);
        throw Error(ErrorCode::invalid_argument, "unknown method '" + method + "'");
      },
      py::arg("method"), py::arg("output_dir"), py::kw_only(), py::arg("input") = py::none(),
      py::arg("profile") = py::none(), py::arg("channel") = py::none(), py::arg("joint") = false,
      py::arg("stack") = py::none(), py::arg("rank") = py::none(), py::arg("energy") = py::none(),
      py::arg("sv_ratio") = py::none(), py::arg("mu") = 16, py::arg("g") = "4",
      py::arg("termination_level") = py::none(), py::arg("critical_band") = kDefaultCriticalBand,
      py::arg("seed") = py::none(), py::arg("noise") = py::none(), py::arg("gap_start") = 0,
      py::arg("gap_length") = 0, py::arg("time_column") = false, py::arg("dt") = py::none(),
      py::arg("threads") = 1, py::arg("dealias") = true,
      "Run `dmd`, `mrdmd` or `compare` like the CLI and write the artifacts. Returns the exit status.");
}
