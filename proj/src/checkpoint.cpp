#include "prenet/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "prenet/errors.hpp"

namespace prenet {
namespace {

using nlohmann::json;

constexpr const char* kFormat = "prenet-checkpoint";
constexpr int kVersion = 1;

json matrix_json(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}

Matrix matrix_from(const json& j) {
  return Matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
                j.at("data").get<std::vector<double>>());
}

}  // namespace

std::string checkpoint_to_json(const Checkpoint& ckpt) {
  const auto& cfg = ckpt.model.config;
  const auto& p = ckpt.model.params;
  json hidden = json::array();
  for (const auto& l : p.hidden) hidden.push_back({{"weights", matrix_json(l.weights)}, {"bias", l.bias}});

  json doc = {
      {"format", kFormat},
      {"version", kVersion},
      {"config",
       {{"variant", to_string(cfg.variant)},
        {"input_dim", cfg.input_dim},
        {"hidden_dims", cfg.hidden_dims},
        {"l2_lambda", cfg.l2_lambda},
        {"labels", {cfg.labels.c1, cfg.labels.c2, cfg.labels.c3}}}},
      {"standardizer", {{"mean", ckpt.standardizer.mean}, {"std", ckpt.standardizer.stddev}}},
      {"params",
       {{"input_dim", p.input_dim},
        {"hidden", hidden},
        {"output_weights", p.output_weights},
        {"output_bias", p.output_bias}}},
      {"pools",
       {{"store", matrix_json(ckpt.pools.store)},
        {"anomalies", ckpt.pools.anomalies},
        {"unlabeled", ckpt.pools.unlabeled}}},
  };
  return doc.dump(1);
}

Checkpoint checkpoint_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    if (doc.at("format").get<std::string>() != kFormat)
      throw SchemaError("not a PReNet checkpoint");
    if (doc.at("version").get<int>() != kVersion)
      throw SchemaError("unsupported checkpoint version " + doc.at("version").dump());

    Checkpoint ckpt;
    const auto& c = doc.at("config");
    auto& cfg = ckpt.model.config;
    cfg.variant = parse_variant(c.at("variant").get<std::string>());
    cfg.input_dim = c.at("input_dim").get<std::size_t>();
    cfg.hidden_dims = c.at("hidden_dims").get<std::vector<std::size_t>>();
    cfg.l2_lambda = c.at("l2_lambda").get<double>();
    const auto labels = c.at("labels").get<std::vector<double>>();
    if (labels.size() != 3) throw SchemaError("checkpoint labels must have three entries");
    cfg.labels = {labels[0], labels[1], labels[2]};
    cfg.validate();

    ckpt.standardizer.mean = doc.at("standardizer").at("mean").get<std::vector<double>>();
    ckpt.standardizer.stddev = doc.at("standardizer").at("std").get<std::vector<double>>();

    const auto& p = doc.at("params");
    auto& params = ckpt.model.params;
    params.input_dim = p.at("input_dim").get<std::size_t>();
    for (const auto& l : p.at("hidden"))
      params.hidden.push_back({matrix_from(l.at("weights")), l.at("bias").get<std::vector<double>>()});
    params.output_weights = p.at("output_weights").get<std::vector<double>>();
    params.output_bias = p.at("output_bias").get<double>();

    const auto& pools = doc.at("pools");
    ckpt.pools.store = matrix_from(pools.at("store"));
    ckpt.pools.anomalies = pools.at("anomalies").get<std::vector<std::size_t>>();
    ckpt.pools.unlabeled = pools.at("unlabeled").get<std::vector<std::size_t>>();

    if (params.input_dim != cfg.input_dim || params.hidden.size() != cfg.hidden_dims.size() ||
        params.two_stream() != cfg.two_stream())
      throw SchemaError("checkpoint parameters do not match its configuration");
    return ckpt;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << checkpoint_to_json(ckpt) << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_json(ss.str());
}

}  // namespace prenet
