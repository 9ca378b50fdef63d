#include "fockrage/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace fockrage {

namespace {

void require_keys(const Json& j, const std::set<std::string>& known,
                  const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) {
      throw ConfigError("config: unknown key '" + key + "' in " + where);
    }
  }
}

double finite_number(const Json& j, const std::string& what) {
  if (!j.is_number()) throw ConfigError("config: " + what + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError("config: " + what + " must be finite");
  return v;
}

std::vector<double> parse_potential(const Json& j, int length) {
  std::vector<double> potential(length, 0.0);
  if (j.is_array()) {
    if (static_cast<int>(j.size()) != length) {
      throw ConfigError("config: potential array length != lattice length");
    }
    for (int i = 0; i < length; ++i) {
      potential[i] = finite_number(j.at(i), "potential entry");
    }
    return potential;
  }
  if (j.is_object()) {
    const std::string kind = j.value("kind", "");
    if (kind == "zero") {
      require_keys(j, {"kind"}, "potential");
      return potential;
    }
    if (kind == "delta") {
      require_keys(j, {"kind", "site", "depth"}, "potential");
      const int site = j.at("site").get<int>();
      if (site < 0 || site >= length) {
        throw ConfigError("config: delta potential site outside lattice");
      }
      potential[site] = finite_number(j.at("depth"), "potential depth");
      return potential;
    }
    throw ConfigError("config: unknown potential kind '" + kind + "'");
  }
  throw ConfigError("config: potential must be an array or a shorthand object");
}

}  // namespace

ExperimentConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("config: document must be an object");
  require_keys(j, {"model", "run", "output", "seed"}, "top level");
  if (!j.contains("model")) throw ConfigError("config: missing 'model'");

  ExperimentConfig config;
  const Json& model = j.at("model");
  require_keys(model,
               {"lattice", "interaction", "statistics", "N", "margin",
                "sector_cap"},
               "model");

  const Json& lattice = model.at("lattice");
  require_keys(lattice, {"length", "hopping", "potential"}, "model.lattice");
  config.model.lattice.length = lattice.at("length").get<int>();
  if (config.model.lattice.length < 2) {
    throw ConfigError("config: lattice length must be >= 2");
  }
  config.model.lattice.hopping =
      finite_number(lattice.at("hopping"), "hopping");
  config.model.lattice.potential =
      parse_potential(lattice.value("potential", Json{{"kind", "zero"}}),
                      config.model.lattice.length);

  const Json interaction = model.value("interaction", Json{{"profile", "none"}});
  require_keys(interaction, {"profile", "strength", "range"},
               "model.interaction");
  const std::string profile = interaction.value("profile", "none");
  if (profile == "none") {
    config.model.has_interaction = false;
  } else if (profile == "contact" || profile == "exponential") {
    config.model.has_interaction = true;
    config.model.interaction.kind =
        profile == "contact" ? InteractionProfile::Kind::contact
                             : InteractionProfile::Kind::exponential;
    config.model.interaction.strength =
        finite_number(interaction.at("strength"), "interaction strength");
    if (profile == "exponential") {
      config.model.interaction.range =
          finite_number(interaction.at("range"), "interaction range");
      if (!(config.model.interaction.range > 0.0)) {
        throw ConfigError("config: interaction range must be positive");
      }
    }
  } else {
    throw ConfigError("config: unknown interaction profile '" + profile + "'");
  }

  const std::string statistics = model.value("statistics", "boson");
  if (statistics == "boson") {
    config.model.statistics = Statistics::boson;
  } else if (statistics == "fermion") {
    config.model.statistics = Statistics::fermion;
  } else {
    throw ConfigError("config: statistics must be 'boson' or 'fermion'");
  }

  config.model.N = model.value("N", 1);
  if (config.model.N < 0) throw ConfigError("config: N must be >= 0");
  config.model.margin = model.value("margin", 0.1);
  if (!(config.model.margin > 0.0) || !std::isfinite(config.model.margin)) {
    throw ConfigError("config: margin must be positive and finite");
  }
  config.model.sector_cap = model.value("sector_cap", kDefaultSectorCap);
  if (config.model.sector_cap < 1) {
    throw ConfigError("config: sector_cap must be positive");
  }

  const Json output = j.value("output", Json::object());
  require_keys(output, {"directory", "formats"}, "output");
  config.output.directory = output.value("directory", "out");
  if (output.contains("formats")) {
    config.output.formats.clear();
    for (const Json& f : output.at("formats")) {
      const std::string name = f.get<std::string>();
      if (name != "csv" && name != "json") {
        throw ConfigError("config: unknown output format '" + name + "'");
      }
      config.output.formats.push_back(name);
    }
  }

  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer()) {
      throw ConfigError("config: seed must be an integer");
    }
    config.seed = j.at("seed").get<std::uint64_t>();
  }
  config.run = j.value("run", Json::object());
  if (!config.run.is_object()) {
    throw ConfigError("config: 'run' must be an object");
  }
  return config;
}

Json config_to_json(const ExperimentConfig& config) {
  Json lattice;
  lattice["length"] = config.model.lattice.length;
  lattice["hopping"] = config.model.lattice.hopping;
  lattice["potential"] = config.model.lattice.potential;

  Json interaction;
  if (!config.model.has_interaction) {
    interaction["profile"] = "none";
  } else if (config.model.interaction.kind ==
             InteractionProfile::Kind::contact) {
    interaction["profile"] = "contact";
    interaction["strength"] = config.model.interaction.strength;
  } else {
    interaction["profile"] = "exponential";
    interaction["strength"] = config.model.interaction.strength;
    interaction["range"] = config.model.interaction.range;
  }

  Json model;
  model["lattice"] = std::move(lattice);
  model["interaction"] = std::move(interaction);
  model["statistics"] =
      config.model.statistics == Statistics::boson ? "boson" : "fermion";
  model["N"] = config.model.N;
  model["margin"] = config.model.margin;
  model["sector_cap"] = config.model.sector_cap;

  Json output;
  output["directory"] = config.output.directory;
  output["formats"] = config.output.formats;

  Json j;
  j["model"] = std::move(model);
  j["output"] = std::move(output);
  j["seed"] = config.seed;
  j["run"] = config.run;
  return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw ConfigError("config: JSON parse error in " + path.string() + ": " +
                      e.what());
  }
  return config_from_json(j);
}

std::string config_hash(const ExperimentConfig& config) {
  return hash_hex(config_to_json(config).dump());
}

TwoBodyOperator build_interaction(const ModelConfig& model) {
  if (!model.has_interaction) {
    return zero_interaction(model.lattice.length);
  }
  return build_pair_interaction(model.lattice, model.interaction);
}

}  // namespace fockrage
