#include "glasdi/checkpoint.hpp"

#include <fstream>

#include "glasdi/errors.hpp"

namespace glasdi {

using nlohmann::json;

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows, Eigen::Index n_rows, Eigen::Index n_cols) {
  if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != n_rows) {
    throw FormatError("checkpoint: matrix has wrong row count");
  }
  Eigen::MatrixXd m(n_rows, n_cols);
  for (Eigen::Index r = 0; r < n_rows; ++r) {
    const auto& row = rows[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n_cols) {
      throw FormatError("checkpoint: matrix has wrong column count");
    }
    for (Eigen::Index c = 0; c < n_cols; ++c) {
      const auto& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) throw FormatError("checkpoint: non-numeric matrix entry");
      m(r, c) = v.get<double>();
    }
  }
  return m;
}

}  // namespace

json mlp_to_json(const MlpParams& net) {
  json weights = json::array();
  json biases = json::array();
  for (std::size_t l = 0; l < net.n_affine(); ++l) {
    weights.push_back(matrix_to_json(net.weights[l]));
    biases.push_back(std::vector<double>(net.biases[l].data(),
                                         net.biases[l].data() + net.biases[l].size()));
  }
  return {{"layer_sizes", net.layer_sizes},
          {"activation", to_string(net.activation)},
          {"weights", weights},
          {"biases", biases}};
}

MlpParams mlp_from_json(const json& doc) {
  try {
    MlpParams net;
    net.layer_sizes = doc.at("layer_sizes").get<std::vector<std::size_t>>();
    net.activation = parse_activation(doc.at("activation").get<std::string>());
    if (net.layer_sizes.size() < 2) throw FormatError("checkpoint: MLP needs two or more layers");
    const auto& weights = doc.at("weights");
    const auto& biases = doc.at("biases");
    if (weights.size() + 1 != net.layer_sizes.size() || biases.size() != weights.size()) {
      throw FormatError("checkpoint: layer count mismatch");
    }
    for (std::size_t l = 0; l + 1 < net.layer_sizes.size(); ++l) {
      const auto out = static_cast<Eigen::Index>(net.layer_sizes[l + 1]);
      const auto in = static_cast<Eigen::Index>(net.layer_sizes[l]);
      net.weights.push_back(matrix_from_json(weights[l], out, in));
      const auto b = biases[l].get<std::vector<double>>();
      if (static_cast<Eigen::Index>(b.size()) != out) throw FormatError("checkpoint: bias size mismatch");
      net.biases.push_back(Eigen::Map<const Eigen::VectorXd>(b.data(), out));
    }
    net.validate();
    return net;
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint: malformed MLP: ") + e.what());
  }
}

json rom_to_json(const RomModel& rom, const json& metadata) {
  if (rom.anchors.empty()) throw InvalidConfig("checkpoint: model has no anchors");
  json anchors = json::array();
  for (const auto& a : rom.anchors) {
    anchors.push_back({{"mu", a.owner_mu.values}, {"xi", matrix_to_json(a.xi)}});
  }
  const BasisSpec& spec = rom.anchors.front().spec;
  return {{"format", kCheckpointFormat},
          {"encoder", mlp_to_json(rom.ae.encoder)},
          {"decoder", mlp_to_json(rom.ae.decoder)},
          {"basis", {{"poly_order", spec.poly_order}, {"include_trig", spec.include_trig}}},
          {"interp", {{"k", rom.interp.k}, {"p", rom.interp.power}}},
          {"anchors", anchors},
          {"metadata", metadata}};
}

RomModel rom_from_json(const json& doc) {
  try {
    if (doc.at("format") != kCheckpointFormat) throw FormatError("checkpoint: unsupported format");
    RomModel rom;
    rom.ae.encoder = mlp_from_json(doc.at("encoder"));
    rom.ae.decoder = mlp_from_json(doc.at("decoder"));
    rom.ae.validate();
    BasisSpec spec;
    spec.poly_order = doc.at("basis").at("poly_order").get<int>();
    spec.include_trig = doc.at("basis").at("include_trig").get<bool>();
    spec.validate();
    rom.interp.k = doc.at("interp").at("k").get<std::size_t>();
    rom.interp.power = doc.at("interp").at("p").get<double>();
    const auto n_z = rom.ae.latent_dim();
    const auto n_b = static_cast<Eigen::Index>(spec.n_basis(n_z));
    for (const auto& a : doc.at("anchors")) {
      DiModel di;
      di.spec = spec;
      di.owner_mu.values = a.at("mu").get<std::vector<double>>();
      di.xi = matrix_from_json(a.at("xi"), n_b, static_cast<Eigen::Index>(n_z));
      rom.anchors.push_back(std::move(di));
    }
    if (rom.anchors.empty()) throw FormatError("checkpoint: no anchors");
    return rom;
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint: malformed document: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const RomModel& rom, const json& metadata) {
  const std::string text = rom_to_json(rom, metadata).dump();
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw FormatError("cannot open " + tmp.string() + " for writing");
    out << text << '\n';
    if (!out) throw FormatError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

RomModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open checkpoint " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError("checkpoint " + path.string() + " is not valid JSON: " + e.what());
  }
  return rom_from_json(doc);
}

}  // namespace glasdi
