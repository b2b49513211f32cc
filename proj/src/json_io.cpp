#include "slicepart/json_io.hpp"

#include <fstream>
#include <sstream>

namespace slicepart {

Json to_json(const VnfFg& g) {
  Json nodes = Json::array();
  for (const VnfNode& n : g.nodes) nodes.push_back({{"id", n.id}, {"cpu", n.cpu}, {"ram", n.ram}});
  Json edges = Json::array();
  for (const VnfEdge& e : g.edges) edges.push_back({{"src", e.src}, {"dst", e.dst}, {"bw", e.bandwidth}});
  return Json{{"nodes", nodes}, {"edges", edges}, {"latency_budget", g.latency_budget}};
}

VnfFg graph_from_json(const Json& j) {
  try {
    VnfFg g;
    for (const auto& n : j.at("nodes")) {
      g.nodes.push_back({n.at("id").get<int>(), n.at("cpu").get<int>(), n.at("ram").get<int>()});
    }
    for (const auto& e : j.at("edges")) {
      g.edges.push_back({e.at("src").get<int>(), e.at("dst").get<int>(), e.at("bw").get<double>()});
    }
    g.latency_budget = j.value("latency_budget", 0.0);
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed graph JSON: ") + e.what());
  }
}

Json to_json(const DomainChain& chain) {
  Json domains = Json::array();
  for (const Domain& d : chain.domains) {
    domains.push_back({{"name", d.name},
                       {"cpu_cost", d.cpu_cost},
                       {"ram_cost", d.ram_cost},
                       {"link_cost", d.link_cost},
                       {"vnf_latency", d.vnf_latency}});
  }
  Json inter = Json::object();
  for (std::size_t m = 0; m < chain.inter_link_cost.size(); ++m) {
    inter[std::to_string(m) + "," + std::to_string(m + 1)] = chain.inter_link_cost[m];
  }
  return Json{{"domains", domains},
              {"inter_link_cost", inter},
              {"target_distribution", chain.target_distribution}};
}

DomainChain chain_from_json(const Json& j) {
  try {
    DomainChain chain;
    for (const auto& d : j.at("domains")) {
      chain.domains.push_back({d.value("name", std::string{}), d.at("cpu_cost").get<double>(),
                               d.at("ram_cost").get<double>(), d.at("link_cost").get<double>(),
                               d.value("vnf_latency", 0.0)});
    }
    const auto& inter = j.at("inter_link_cost");
    for (std::size_t m = 0; m + 1 < chain.domains.size(); ++m) {
      const std::string key = std::to_string(m) + "," + std::to_string(m + 1);
      if (!inter.contains(key)) throw InvalidInput("inter_link_cost is missing pair " + key);
      chain.inter_link_cost.push_back(inter.at(key).get<double>());
    }
    chain.target_distribution = j.at("target_distribution").get<std::vector<double>>();
    chain.validate();
    return chain;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed chain JSON: ") + e.what());
  }
}

Json to_json(const AssignmentMask& mask) {
  Json fixed = Json::array();
  for (const auto& [node, domain] : mask.fixed) fixed.push_back({{"node", node}, {"domain", domain}});
  return Json{{"fixed", fixed}};
}

AssignmentMask mask_from_json(const Json& j) {
  try {
    AssignmentMask mask;
    for (const auto& entry : j.at("fixed")) {
      const int node = entry.at("node").get<int>();
      if (!mask.fixed.emplace(node, entry.at("domain").get<int>()).second) {
        throw InvalidInput("mask fixes node " + std::to_string(node) + " twice");
      }
    }
    return mask;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed mask JSON: ") + e.what());
  }
}

Json to_json(const ObjectiveWeights& w) {
  return Json{{"alpha", w.alpha}, {"beta", w.beta}, {"gamma", w.gamma}, {"delta", w.delta}, {"mu", w.mu}};
}

ObjectiveWeights weights_from_json(const Json& j) {
  ObjectiveWeights w;
  w.alpha = j.value("alpha", w.alpha);
  w.beta = j.value("beta", w.beta);
  w.gamma = j.value("gamma", w.gamma);
  w.delta = j.value("delta", w.delta);
  w.mu = j.value("mu", w.mu);
  w.validate();
  return w;
}

Json to_json(const ObjectiveValue& v) {
  return Json{{"total", v.total},
              {"breakdown",
               {{"dc_hat", v.breakdown.dc_hat},
                {"dl_hat", v.breakdown.dl_hat},
                {"ic_hat", v.breakdown.ic_hat},
                {"kl", v.breakdown.kl},
                {"penalty", v.breakdown.penalty}}},
              {"raw", {{"dc", v.raw.dc}, {"dl", v.raw.dl}, {"ic", v.raw.ic}, {"total", v.raw.total()}}},
              {"load", v.load}};
}

Json to_json(const BnbStats& s, bool include_timing) {
  Json j{{"explored", s.explored}, {"pruned", s.pruned}, {"proven_optimal", s.proven_optimal}};
  if (include_timing) j["wall_time"] = s.wall_time;
  return j;
}

Json to_json(const TrainHistory& h, bool include_timing) {
  Json j{{"initial_val_loss", h.initial_val_loss},
         {"initial_val_objective", h.initial_val_objective},
         {"best_epoch", h.best_epoch},
         {"train_loss", h.train_loss},
         {"val_loss", h.val_loss},
         {"val_objective", h.val_objective}};
  if (include_timing) j["wall_time"] = h.wall_time;
  return j;
}

const char* to_string(NormalizationMode mode) {
  switch (mode) {
    case NormalizationMode::kDemandWeighted: return "demand_weighted";
    case NormalizationMode::kLiteral: return "literal";
    case NormalizationMode::kNone: return "none";
  }
  return "unknown";
}

Json to_json(const TrainConfig& c) {
  return Json{{"learning_rate", c.learning_rate},
              {"epochs", c.epochs},
              {"optimizer", c.optimizer == Optimizer::kAdam ? "adam" : "gradient_descent"},
              {"beta1", c.beta1},
              {"beta2", c.beta2},
              {"epsilon", c.epsilon},
              {"seed", c.seed},
              {"patience", c.patience},
              {"penalty_warmup", c.penalty_warmup},
              {"normalization", to_string(c.normalization)}};
}

namespace {

Json layer_json(const DenseLayer& l) {
  std::vector<double> weight;
  weight.reserve(l.weight.size());
  for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
    for (Eigen::Index c = 0; c < l.weight.cols(); ++c) weight.push_back(l.weight(r, c));
  }
  std::vector<double> bias(l.bias.data(), l.bias.data() + l.bias.size());
  return Json{{"rows", l.weight.rows()}, {"cols", l.weight.cols()}, {"weight", weight}, {"bias", bias}};
}

DenseLayer layer_from_json(const Json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto weight = j.at("weight").get<std::vector<double>>();
  const auto bias = j.at("bias").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(weight.size()) != rows * cols || static_cast<Eigen::Index>(bias.size()) != cols) {
    throw InvalidInput("checkpoint layer has inconsistent shapes");
  }
  DenseLayer l{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(cols)};
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) l.weight(r, c) = weight[r * cols + c];
  }
  for (Eigen::Index c = 0; c < cols; ++c) l.bias(c) = bias[c];
  return l;
}

}  // namespace

Json checkpoint_json(const GnnModel& model, const TrainConfig& config, const ObjectiveWeights& w) {
  Json layers = Json::array();
  for (const DenseLayer& l : model.layers) layers.push_back(layer_json(l));
  return Json{{"schema", kCheckpointSchema},
              {"input_dim", model.input_dim},
              {"latent_size", model.latent_size},
              {"num_layers", model.num_layers},
              {"num_domains", model.num_domains},
              {"layers", layers},
              {"head", layer_json(model.head)},
              {"config", to_json(config)},
              {"weights", to_json(w)}};
}

GnnModel model_from_checkpoint(const Json& j) {
  try {
    if (j.at("schema").get<std::string>() != kCheckpointSchema) {
      throw InvalidInput("unsupported checkpoint schema");
    }
    GnnModel model;
    model.input_dim = j.at("input_dim").get<int>();
    model.latent_size = j.at("latent_size").get<int>();
    model.num_layers = j.at("num_layers").get<int>();
    model.num_domains = j.at("num_domains").get<int>();
    for (const auto& l : j.at("layers")) model.layers.push_back(layer_from_json(l));
    model.head = layer_from_json(j.at("head"));
    model.validate();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed checkpoint: ") + e.what());
  }
}

ObjectiveWeights parse_weights(const std::string& text) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw InvalidInput("bad weight '" + item + "'");
    } catch (const std::logic_error&) {
      throw InvalidInput("bad weight '" + item + "'");
    }
  }
  if (values.size() != 5) throw InvalidInput("weights need five values: alpha,beta,gamma,delta,mu");
  ObjectiveWeights w{values[0], values[1], values[2], values[3], values[4]};
  w.validate();
  return w;
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  try {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  } catch (const std::filesystem::filesystem_error& e) {
    throw InvalidInput(e.what());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << text;
  if (!out) throw InvalidInput("failed writing " + path.string());
}

void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

}  // namespace slicepart
