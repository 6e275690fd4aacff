#include "metaopt/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include "metaopt/errors.hpp"

namespace metaopt {
namespace {

using nlohmann::json;

void expect_object(const json& doc, std::string_view context) {
  if (!doc.is_object()) throw SchemaError(std::string(context) + " must be a JSON object");
}

void expect_keys(const json& doc, std::initializer_list<std::string_view> allowed, std::string_view context) {
  expect_object(doc, context);
  for (const auto& [key, _] : doc.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw SchemaError("unknown key '" + key + "' in " + std::string(context));
  }
}

template <typename T>
T get_or(const json& doc, const char* key, T fallback) {
  if (!doc.contains(key)) return fallback;
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw SchemaError(std::string("field '") + key + "': " + e.what());
  }
}

template <typename T>
T require(const json& doc, const char* key, std::string_view context) {
  if (!doc.contains(key)) throw SchemaError("missing '" + std::string(key) + "' in " + std::string(context));
  return get_or<T>(doc, key, T{});
}

MaterialPtr lookup(const MaterialLibrary& lib, const std::string& name) {
  auto it = lib.find(name);
  if (it == lib.end()) throw SchemaError("unknown material '" + name + "'");
  return it->second;
}

MaterialPtr ambient_from(const json& doc, const MaterialLibrary& lib) {
  if (!doc.contains("ambient")) return std::make_shared<const Material>(Material::constant("air", 1.0));
  return lookup(lib, doc.at("ambient").get<std::string>());
}

}  // namespace

const char* to_string(SolverKind kind) noexcept {
  switch (kind) {
    case SolverKind::exhaustive: return "exhaustive";
    case SolverKind::annealing: return "annealing";
    case SolverKind::qaoa: return "qaoa";
  }
  return "?";
}

SolverKind parse_solver_kind(std::string_view text) {
  if (text == "exhaustive") return SolverKind::exhaustive;
  if (text == "annealing") return SolverKind::annealing;
  if (text == "qaoa") return SolverKind::qaoa;
  throw ConfigError("unknown solver '" + std::string(text) + "' (exhaustive, annealing, qaoa)");
}

void RunConfig::validate() const {
  if (initial_points < 2) throw ConfigError("initial_points must be at least 2");
  if (max_iterations < 1) throw ConfigError("max_iterations must be at least 1");
  if (workers < 1) throw ConfigError("workers must be at least 1");
  const std::size_t n = bits();
  if (n < 63 && initial_points > (std::size_t{1} << n)) {
    throw ConfigError("initial_points exceeds the number of distinct designs");
  }
  if (solver.kind == SolverKind::exhaustive && n > qubo::kBruteForceMaxVariables) {
    throw ConfigError("exhaustive solver supports at most " + std::to_string(qubo::kBruteForceMaxVariables) +
                      " bits, encoding has " + std::to_string(n));
  }
  if (solver.kind == SolverKind::qaoa && n > qaoa::kMaxQubits) {
    throw ConfigError("qaoa solver supports at most " + std::to_string(qaoa::kMaxQubits) +
                      " bits, encoding has " + std::to_string(n));
  }
  fm.validate();
}

MaterialLibrary parse_materials(const json& doc, const std::filesystem::path& base_dir) {
  expect_object(doc, "materials");
  MaterialLibrary lib;
  for (const auto& [name, def] : doc.items()) {
    expect_keys(def, {"n", "k", "table", "csv"}, "material '" + name + "'");
    if (def.contains("csv")) {
      auto path = std::filesystem::path(def.at("csv").get<std::string>());
      if (path.is_relative()) path = base_dir / path;
      std::ifstream in(path);
      if (!in) throw SchemaError("cannot open dispersion file '" + path.string() + "'");
      lib[name] = std::make_shared<const Material>(load_dispersion(in, name));
    } else if (def.contains("table")) {
      std::vector<DispersionPoint> rows;
      for (const auto& row : def.at("table")) {
        if (!row.is_array() || row.size() != 3) throw SchemaError("material table rows are [wavelength_um, n, k]");
        rows.push_back({row[0].get<double>(), row[1].get<double>(), row[2].get<double>()});
      }
      lib[name] = std::make_shared<const Material>(name, std::move(rows));
    } else if (def.contains("n")) {
      lib[name] = std::make_shared<const Material>(
          Material::constant(name, def.at("n").get<double>(), get_or(def, "k", 0.0)));
    } else {
      throw SchemaError("material '" + name + "' needs one of n, table or csv");
    }
  }
  return lib;
}

SpectralGrid parse_grid(const json& doc) {
  expect_keys(doc, {"start_um", "stop_um", "count", "wavelengths_um"}, "grid");
  if (doc.contains("wavelengths_um")) {
    if (doc.contains("start_um") || doc.contains("stop_um") || doc.contains("count")) {
      throw SchemaError("grid takes either wavelengths_um or start_um/stop_um/count");
    }
    return SpectralGrid(doc.at("wavelengths_um").get<std::vector<double>>());
  }
  return SpectralGrid::linspace(require<double>(doc, "start_um", "grid"), require<double>(doc, "stop_um", "grid"),
                                require<std::size_t>(doc, "count", "grid"));
}

std::vector<IncidenceCondition> parse_conditions(const json& doc) {
  if (!doc.is_array() || doc.empty()) throw SchemaError("conditions must be a non-empty array");
  std::vector<IncidenceCondition> out;
  for (const auto& c : doc) {
    expect_keys(c, {"angle_deg", "polarization"}, "condition");
    out.emplace_back(require<double>(c, "angle_deg", "condition"),
                     parse_polarization(get_or<std::string>(c, "polarization", "unpolarized")));
  }
  return out;
}

tmm::FomSpec parse_fom(const json& doc) {
  if (doc.is_string()) {
    if (doc.get<std::string>() == "trc") return tmm::FomSpec::transparent_radiative_cooler();
    throw SchemaError("unknown FOM preset '" + doc.get<std::string>() + "'");
  }
  expect_keys(doc, {"bands"}, "fom");
  std::vector<tmm::FomBand> bands;
  for (const auto& b : doc.at("bands")) {
    expect_keys(b, {"lo_um", "hi_um", "quantity", "weight"}, "fom band");
    bands.push_back({require<double>(b, "lo_um", "fom band"), require<double>(b, "hi_um", "fom band"),
                     tmm::parse_quantity(require<std::string>(b, "quantity", "fom band")),
                     get_or(b, "weight", 1.0)});
  }
  return tmm::FomSpec(std::move(bands));
}

namespace {

RunConfig parse_run_config_impl(const json& doc, const std::filesystem::path& base_dir) {
  expect_keys(doc,
              {"materials", "ambient", "substrate", "encoding", "fom", "grid", "conditions", "solver", "fm",
               "initial_points", "max_iterations", "stop_patience", "workers", "seed"},
              "run config");
  const auto lib = parse_materials(require<json>(doc, "materials", "run config"), base_dir);

  const json& enc = doc.at("encoding");
  expect_keys(enc, {"bits_per_layer", "layer_count", "palette", "thickness_nm"}, "encoding");
  std::vector<MaterialPtr> palette;
  for (const auto& name : require<std::vector<std::string>>(enc, "palette", "encoding")) {
    palette.push_back(lookup(lib, name));
  }
  std::vector<double> thickness;
  if (!enc.contains("thickness_nm")) throw SchemaError("missing 'thickness_nm' in encoding");
  if (enc.at("thickness_nm").is_array()) {
    thickness = enc.at("thickness_nm").get<std::vector<double>>();
  } else {
    thickness = {enc.at("thickness_nm").get<double>()};
  }
  if (!doc.contains("substrate")) throw SchemaError("missing 'substrate' in run config");
  BinaryEncoding encoding(get_or<std::size_t>(enc, "bits_per_layer", 1),
                          require<std::size_t>(enc, "layer_count", "encoding"), std::move(palette),
                          std::move(thickness), ambient_from(doc, lib),
                          lookup(lib, doc.at("substrate").get<std::string>()));

  SolverSettings solver;
  if (doc.contains("solver")) {
    const json& s = doc.at("solver");
    expect_keys(s, {"kind", "annealing", "qaoa"}, "solver");
    solver.kind = parse_solver_kind(get_or<std::string>(s, "kind", "annealing"));
    if (s.contains("annealing")) {
      const json& a = s.at("annealing");
      expect_keys(a, {"sweeps", "restarts", "t_hot", "t_cold"}, "solver.annealing");
      solver.annealing.sweeps = get_or(a, "sweeps", solver.annealing.sweeps);
      solver.annealing.restarts = get_or(a, "restarts", solver.annealing.restarts);
      if (a.contains("t_hot")) solver.annealing.t_hot = a.at("t_hot").get<double>();
      if (a.contains("t_cold")) solver.annealing.t_cold = a.at("t_cold").get<double>();
    }
    if (s.contains("qaoa")) {
      const json& q = s.at("qaoa");
      expect_keys(q, {"p", "shots", "outer_budget", "restarts"}, "solver.qaoa");
      solver.qaoa.p = get_or(q, "p", solver.qaoa.p);
      solver.qaoa.shots = get_or(q, "shots", solver.qaoa.shots);
      solver.qaoa.outer_budget = get_or(q, "outer_budget", solver.qaoa.outer_budget);
      solver.qaoa.restarts = get_or(q, "restarts", solver.qaoa.restarts);
    }
  }

  fm::TrainConfig train;
  if (doc.contains("fm")) {
    const json& f = doc.at("fm");
    expect_keys(f, {"latent_dim", "learning_rate", "epochs", "batch_size", "init_scale"}, "fm");
    train.latent_dim = get_or(f, "latent_dim", train.latent_dim);
    train.learning_rate = get_or(f, "learning_rate", train.learning_rate);
    train.epochs = get_or(f, "epochs", train.epochs);
    train.batch_size = get_or(f, "batch_size", train.batch_size);
    train.init_scale = get_or(f, "init_scale", train.init_scale);
  }

  RunConfig config{std::move(encoding),
                   doc.contains("fom") ? parse_fom(doc.at("fom")) : tmm::FomSpec::transparent_radiative_cooler(),
                   parse_grid(require<json>(doc, "grid", "run config")),
                   doc.contains("conditions") ? parse_conditions(doc.at("conditions"))
                                              : std::vector<IncidenceCondition>{{0.0, Polarization::unpolarized}},
                   solver,
                   train,
                   20,
                   100,
                   0,
                   1,
                   0,
                   nlohmann::json::object()};
  config.initial_points = get_or(doc, "initial_points", config.initial_points);
  config.max_iterations = get_or(doc, "max_iterations", config.max_iterations);
  config.stop_patience = get_or(doc, "stop_patience", config.stop_patience);
  config.workers = get_or(doc, "workers", config.workers);
  config.seed = get_or(doc, "seed", config.seed);
  config.fm.workers = config.workers;
  config.fm.seed = config.seed;

  config.echo = doc;
  config.echo["initial_points"] = config.initial_points;
  config.echo["max_iterations"] = config.max_iterations;
  config.echo["stop_patience"] = config.stop_patience;
  config.echo["workers"] = config.workers;
  config.echo["seed"] = config.seed;
  config.validate();
  return config;
}

}  // namespace

RunConfig parse_run_config(const json& doc, const std::filesystem::path& base_dir) {
  try {
    return parse_run_config_impl(doc, base_dir);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("invalid run config: ") + e.what());
  }
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(read_json_file(path), path.parent_path());
}

SimulationSpec parse_simulation_spec(const json& doc, const std::filesystem::path& base_dir) {
  try {
  expect_keys(doc, {"materials", "ambient", "substrate", "layers", "grid", "conditions"}, "simulation spec");
  const auto lib = parse_materials(require<json>(doc, "materials", "simulation spec"), base_dir);
  std::vector<Layer> layers;
  if (doc.contains("layers")) {
    for (const auto& l : doc.at("layers")) {
      expect_keys(l, {"material", "thickness_nm"}, "layer");
      layers.push_back({lookup(lib, require<std::string>(l, "material", "layer")),
                        require<double>(l, "thickness_nm", "layer")});
    }
  }
  if (!doc.contains("substrate")) throw SchemaError("missing 'substrate' in simulation spec");
  return {LayerStack(ambient_from(doc, lib), std::move(layers), lookup(lib, doc.at("substrate").get<std::string>())),
          parse_grid(require<json>(doc, "grid", "simulation spec")),
          doc.contains("conditions") ? parse_conditions(doc.at("conditions"))
                                     : std::vector<IncidenceCondition>{{0.0, Polarization::unpolarized}}};
  } catch (const json::exception& e) {
    throw SchemaError(std::string("invalid simulation spec: ") + e.what());
  }
}

}  // namespace metaopt
