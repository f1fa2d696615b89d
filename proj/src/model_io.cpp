#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qngrc/errors.hpp"
#include "qngrc/io.hpp"
#include "qngrc/ngrc.hpp"

namespace qngrc {

namespace {
constexpr char kModelMagic[8] = {'Q', 'N', 'G', 'R', 'C', 'W', 'M', '1'};
}

void save_model(const std::string& path, const WeightModel& m) {
  nlohmann::json h;
  h["format"] = "qngrc.model";
  h["version"] = 1;
  h["config"] = {{"m", m.config.m},         {"p", m.config.p},          {"delta", m.config.delta},
                 {"tau", m.config.tau},     {"lambda", m.config.lambda}, {"layout", to_string(m.layout)}};
  h["diagnostics"] = {{"kappa_X", m.kappa_X},   {"kappa", m.kappa},   {"kappa_W", m.kappa_W},
                      {"sigma_min_X", m.sigma_min_X}, {"rank_X", m.rank_X}, {"n_train", m.n_train}};
  h["norms"] = {{"X", m.norm_X}, {"Y", m.norm_Y}, {"W", m.norm_W}};
  h["state_dim"] = m.state_dim;
  h["rows"] = m.W.rows();
  h["cols"] = m.W.cols();
  const std::string header = h.dump();

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os.write(kModelMagic, 8);
  io::put_u64(os, header.size());
  os.write(header.data(), static_cast<std::streamsize>(header.size()));
  io::put_complex_block(os, m.W);
  if (!os) throw IoError("write failed: " + path);
}

WeightModel load_model(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kModelMagic, 8) != 0) throw IoError(path + ": not a model file");
  const auto hlen = io::get_u64(is);
  if (hlen > (1u << 24)) throw IoError(path + ": corrupt header length");
  std::string header(hlen, '\0');
  if (!is.read(header.data(), static_cast<std::streamsize>(hlen))) throw IoError(path + ": truncated header");
  WeightModel m;
  try {
    auto h = nlohmann::json::parse(header);
    const auto& c = h.at("config");
    m.config.m = c.at("m").get<int>();
    m.config.p = c.at("p").get<int>();
    m.config.delta = c.at("delta").get<int>();
    m.config.tau = c.at("tau").get<std::int64_t>();
    m.config.lambda = c.at("lambda").get<double>();
    m.layout = layout_from_string(c.at("layout").get<std::string>());
    const auto& d = h.at("diagnostics");
    m.kappa_X = d.at("kappa_X").get<double>();
    m.kappa = d.at("kappa").get<double>();
    m.kappa_W = d.at("kappa_W").get<double>();
    m.sigma_min_X = d.at("sigma_min_X").get<double>();
    m.rank_X = d.at("rank_X").get<Eigen::Index>();
    m.n_train = d.at("n_train").get<Eigen::Index>();
    m.norm_X = h.at("norms").at("X").get<double>();
    m.norm_Y = h.at("norms").at("Y").get<double>();
    m.norm_W = h.at("norms").at("W").get<double>();
    m.state_dim = h.at("state_dim").get<Eigen::Index>();
    m.W.resize(h.at("rows").get<Eigen::Index>(), h.at("cols").get<Eigen::Index>());
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
  io::get_complex_block(is, m.W);
  return m;
}

}  // namespace qngrc
