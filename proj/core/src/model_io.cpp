#include "atree/model_io.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "atree/error.hpp"
#include "atree/json_config.hpp"

namespace atree {

using nlohmann::json;

namespace {

constexpr const char* kFormatName = "atree-model";

const char* route_name(Route r) {
  switch (r) {
    case Route::left: return "left";
    case Route::right: return "right";
    case Route::both: return "both";
  }
  return "right";
}

Route route_from(const std::string& s) {
  if (s == "left") return Route::left;
  if (s == "right") return Route::right;
  throw ModelFormatError("bad pass_through side '" + s + "'");
}

json stump_rounds_to_json(const BoostedClassifier& b) {
  json rounds = json::array();
  for (const auto& r : b.rounds) {
    rounds.push_back({{"alpha", r.alpha},
                      {"feature", r.stump.feature_index},
                      {"threshold", r.stump.threshold},
                      {"polarity", r.stump.polarity}});
  }
  return {{"rounds", rounds},
          {"round_errors", b.round_errors},
          {"exited_early", b.exited_early},
          {"pure", b.pure}};
}

BoostedClassifier boost_from_json(const json& j) {
  BoostedClassifier b;
  for (const auto& r : j.at("rounds")) {
    BoostRound round;
    round.alpha = r.at("alpha").get<double>();
    round.stump.feature_index = r.at("feature").get<std::size_t>();
    round.stump.threshold = r.at("threshold").get<double>();
    round.stump.polarity = r.at("polarity").get<int>();
    if (round.stump.polarity != 1 && round.stump.polarity != -1) {
      throw ModelFormatError("stump polarity must be +1 or -1");
    }
    b.rounds.push_back(round);
  }
  b.round_errors = j.at("round_errors").get<std::vector<double>>();
  b.exited_early = j.at("exited_early").get<bool>();
  b.pure = j.at("pure").get<bool>();
  return b;
}

json svm_to_json(const SvmModel& model) {
  if (const auto* lin = std::get_if<LinearSvmModel>(&model)) {
    return {{"type", "linear"}, {"weights", lin->weights}, {"bias", lin->bias}};
  }
  const auto& k = std::get<KernelSvmModel>(model);
  return {{"type", "kernel"},
          {"kernel", k.kernel.to_string()},
          {"bias", k.bias},
          {"c", k.c},
          {"sv_ids", k.sv_ids},
          {"coefficients", k.dual_coefficients},
          {"support_vectors", k.support_vectors}};
}

SvmModel svm_from_json(const json& j, std::size_t dimension) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "linear") {
    LinearSvmModel m;
    m.weights = j.at("weights").get<std::vector<double>>();
    m.bias = j.at("bias").get<double>();
    if (m.weights.size() != dimension) throw ModelFormatError("linear svm dimension mismatch");
    return m;
  }
  if (type != "kernel") throw ModelFormatError("unknown svm type '" + type + "'");
  KernelSvmModel m;
  m.kernel = KernelSpec::parse(j.at("kernel").get<std::string>());
  m.bias = j.at("bias").get<double>();
  m.c = j.at("c").get<double>();
  m.sv_ids = j.at("sv_ids").get<std::vector<std::size_t>>();
  m.dual_coefficients = j.at("coefficients").get<std::vector<double>>();
  m.support_vectors = j.at("support_vectors").get<std::vector<std::vector<double>>>();
  if (m.sv_ids.size() != m.support_vectors.size() ||
      m.dual_coefficients.size() != m.support_vectors.size()) {
    throw ModelFormatError("kernel svm arrays differ in length");
  }
  for (const auto& sv : m.support_vectors) {
    if (sv.size() != dimension) throw ModelFormatError("support vector dimension mismatch");
  }
  return m;
}

json split_to_json(const EntropySplit& s) {
  return {{"rule", s.rule == SplitRule::feature_threshold ? "feature" : "label"},
          {"feature", s.feature_index},
          {"threshold", s.threshold},
          {"left_mass", s.left_mass},
          {"right_mass", s.right_mass},
          {"left_histogram", s.left_histogram},
          {"right_histogram", s.right_histogram},
          {"objective", s.objective}};
}

EntropySplit split_from_json(const json& j) {
  EntropySplit s;
  const std::string rule = j.at("rule").get<std::string>();
  if (rule == "feature") s.rule = SplitRule::feature_threshold;
  else if (rule == "label") s.rule = SplitRule::literal_label_threshold;
  else throw ModelFormatError("unknown split rule '" + rule + "'");
  s.feature_index = j.at("feature").get<std::size_t>();
  s.threshold = j.at("threshold").get<double>();
  s.left_mass = j.at("left_mass").get<double>();
  s.right_mass = j.at("right_mass").get<double>();
  s.left_histogram = j.at("left_histogram").get<std::vector<double>>();
  s.right_histogram = j.at("right_histogram").get<std::vector<double>>();
  s.objective = j.at("objective").get<double>();
  return s;
}

json node_to_json(const AtreeNode& node) {
  json j = {{"id", node.id}, {"depth", node.depth}, {"samples", node.sample_count}};
  if (node.is_leaf()) {
    j["kind"] = "leaf";
    j["label"] = node.leaf().class_label;
    j["purity"] = node.leaf().training_purity;
    return j;
  }
  const auto& in = node.internal();
  j["kind"] = "internal";
  j["children"] = {in.left, in.right};
  j["split"] = split_to_json(in.split);
  j["boost"] = stump_rounds_to_json(in.boost);
  j["pos_classes"] = in.pos_classes;
  j["neg_classes"] = in.neg_classes;
  j["class_distribution"] = in.class_distribution;
  j["svm"] = in.svm ? svm_to_json(*in.svm) : json(nullptr);
  j["pass_through"] = in.pass_through ? json(route_name(*in.pass_through)) : json(nullptr);
  return j;
}

void check_tree(const Atree& tree) {
  const std::size_t count = tree.nodes.size();
  if (count == 0) throw ModelFormatError("model has no nodes");
  std::vector<int> parents(count, 0);
  for (const auto& node : tree.nodes) {
    if (node.is_leaf()) {
      const int label = node.leaf().class_label;
      if (label < 0 || label >= tree.num_classes) {
        throw ModelFormatError("leaf " + std::to_string(node.id) + " has label out of range");
      }
      continue;
    }
    const auto& in = node.internal();
    for (std::size_t child : {in.left, in.right}) {
      if (child >= count || child <= node.id) {
        throw ModelFormatError("node " + std::to_string(node.id) + " has bad child index");
      }
      if (tree.nodes[child].depth != node.depth + 1) {
        throw ModelFormatError("node " + std::to_string(child) + " has inconsistent depth");
      }
      ++parents[child];
    }
    if (in.left == in.right) throw ModelFormatError("node children must differ");
    for (const auto& r : in.boost.rounds) {
      if (r.stump.feature_index >= tree.dimension) {
        throw ModelFormatError("stump feature out of range");
      }
    }
  }
  if (parents[0] != 0) throw ModelFormatError("root must not have a parent");
  for (std::size_t i = 1; i < count; ++i) {
    if (parents[i] != 1) {
      throw ModelFormatError("node " + std::to_string(i) + " is not reachable exactly once");
    }
  }
}

}  // namespace

std::string serialize_model(const Atree& tree) {
  json nodes = json::array();
  for (const auto& node : tree.nodes) nodes.push_back(node_to_json(node));
  json doc = {{"format", kFormatName},
              {"version", kModelSchemaVersion},
              {"config", json::parse(atree_config_to_json(tree.config))},
              {"label_map", tree.label_names},
              {"num_classes", tree.num_classes},
              {"dimension", tree.dimension},
              {"depth", tree.depth()},
              {"nodes", nodes}};
  return doc.dump(1) + "\n";
}

Atree deserialize_model(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    throw ModelFormatError(std::string("model is not valid JSON: ") + e.what());
  }
  try {
    if (!doc.is_object()) throw ModelFormatError("model document must be a JSON object");
    if (doc.value("format", std::string()) != kFormatName) {
      throw ModelFormatError("not an atree model (missing format tag)");
    }
    const json& version = doc.at("version");
    if (!version.is_number_integer() || version.get<int>() != kModelSchemaVersion) {
      throw ModelFormatError("unsupported model schema version " + version.dump() +
                             " (expected " + std::to_string(kModelSchemaVersion) + ")");
    }
    Atree tree;
    tree.config = atree_config_from_json(doc.at("config").dump());
    tree.label_names = doc.at("label_map").get<std::vector<std::int64_t>>();
    tree.num_classes = doc.at("num_classes").get<int>();
    tree.dimension = doc.at("dimension").get<std::size_t>();
    if (tree.label_names.size() != static_cast<std::size_t>(tree.num_classes)) {
      throw ModelFormatError("label_map size does not match num_classes");
    }
    const json& nodes = doc.at("nodes");
    if (!nodes.is_array()) throw ModelFormatError("nodes must be an array");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const json& j = nodes[i];
      AtreeNode node;
      node.id = j.at("id").get<std::size_t>();
      if (node.id != i) throw ModelFormatError("node ids must equal their position");
      node.depth = j.at("depth").get<int>();
      node.sample_count = j.at("samples").get<std::size_t>();
      const std::string kind = j.at("kind").get<std::string>();
      if (kind == "leaf") {
        node.body = LeafNode{j.at("label").get<int>(), j.at("purity").get<double>()};
      } else if (kind == "internal") {
        InternalNode in;
        const auto children = j.at("children").get<std::vector<std::size_t>>();
        if (children.size() != 2) throw ModelFormatError("internal node needs two children");
        in.left = children[0];
        in.right = children[1];
        in.split = split_from_json(j.at("split"));
        in.boost = boost_from_json(j.at("boost"));
        in.pos_classes = j.at("pos_classes").get<std::vector<int>>();
        in.neg_classes = j.at("neg_classes").get<std::vector<int>>();
        in.class_distribution = j.at("class_distribution").get<std::vector<double>>();
        if (!j.at("svm").is_null()) in.svm = svm_from_json(j.at("svm"), tree.dimension);
        if (!j.at("pass_through").is_null()) {
          in.pass_through = route_from(j.at("pass_through").get<std::string>());
        }
        node.body = std::move(in);
      } else {
        throw ModelFormatError("unknown node kind '" + kind + "'");
      }
      tree.nodes.push_back(std::move(node));
    }
    check_tree(tree);
    return tree;
  } catch (const json::exception& e) {
    throw ModelFormatError(std::string("malformed model: ") + e.what());
  } catch (const ModelFormatError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ModelFormatError(std::string("malformed model: ") + e.what());
  }
}

void save_model(const Atree& tree, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeError("cannot write " + path.string());
  out << serialize_model(tree);
  if (!out) throw RuntimeError("write failed for " + path.string());
}

Atree load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open model " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_model(buf.str());
}

std::string export_dot(const Atree& tree, int max_depth) {
  auto visible = [&](const AtreeNode& n) { return max_depth < 0 || n.depth < max_depth; };
  auto number = [](double v) {
    std::ostringstream s;
    s.precision(4);
    s << v;
    return s.str();
  };
  std::ostringstream out;
  out << "digraph atree {\n";
  out << "  node [fontname=\"Helvetica\"];\n";
  for (const auto& n : tree.nodes) {
    if (!visible(n)) continue;
    out << "  n" << n.id << " [";
    if (n.is_leaf()) {
      const auto& leaf = n.leaf();
      out << "shape=box, label=\"class "
          << tree.label_names[static_cast<std::size_t>(leaf.class_label)]
          << "\\npurity " << number(leaf.training_purity) << "\"";
    } else {
      const auto& in = n.internal();
      out << "shape=ellipse, label=\"";
      if (in.split.rule == SplitRule::feature_threshold) {
        out << "f" << in.split.feature_index << " < " << number(in.split.threshold);
      } else {
        out << "label < " << number(in.split.threshold);
      }
      out << "\\n|Z+|/|Z-| = " << in.pos_classes.size() << "/" << in.neg_classes.size();
      if (in.pass_through) out << "\\npass-through " << route_name(*in.pass_through);
      out << "\"";
    }
    out << "];\n";
  }
  for (const auto& n : tree.nodes) {
    if (!visible(n) || n.is_leaf()) continue;
    const auto& in = n.internal();
    if (visible(tree.nodes[in.left])) {
      out << "  n" << n.id << " -> n" << in.left << " [label=\"-\"];\n";
    }
    if (visible(tree.nodes[in.right])) {
      out << "  n" << n.id << " -> n" << in.right << " [label=\"+\"];\n";
    }
  }
  out << "}\n";
  return out.str();
}

}  // namespace atree
