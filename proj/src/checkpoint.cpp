#include "offlang/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "offlang/error.hpp"

namespace offlang::checkpoint {

namespace {

constexpr char kMagic[4] = {'O', 'L', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(buf, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(buf, 8);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char buf[4];
  in.read(reinterpret_cast<char*>(buf), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

void put_doubles(std::ostream& out, const std::vector<double>& values) {
  for (double d : values) {
    put_u64(out, std::bit_cast<std::uint64_t>(d));
  }
}

void get_doubles(std::istream& in, std::vector<double>& values) {
  for (double& d : values) {
    d = std::bit_cast<double>(get_u64(in));
  }
}

}  // namespace

void save(const models::ModelState& state, const std::string& path) {
  nlohmann::json header;
  header["kind"] = state.kind == models::ModelKind::kBiLstm ? "bilstm" : "cnn";
  if (state.kind == models::ModelKind::kBiLstm) {
    header["config"] = {{"embed_dim", state.bilstm.embed_dim},
                        {"hidden", state.bilstm.hidden},
                        {"layers", state.bilstm.layers},
                        {"dropout_keep", state.bilstm.dropout_keep},
                        {"num_classes", state.bilstm.num_classes}};
  } else {
    header["config"] = {{"embed_dim", state.cnn.embed_dim},
                        {"filter_widths", state.cnn.filter_widths},
                        {"filters_per_width", state.cnn.filters_per_width},
                        {"dropout_keep", state.cnn.dropout_keep},
                        {"num_classes", state.cnn.num_classes}};
  }
  header["vocab"] = state.vocab.tokens();
  header["label_set"] = state.label_set;
  nlohmann::json params = nlohmann::json::array();
  for (const auto& p : state.params) {
    params.push_back({{"name", p.name}, {"shape", p.tensor.shape}});
  }
  header["params"] = params;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  out.write(kMagic, 4);
  put_u32(out, kVersion);
  const std::string header_text = header.dump();
  put_u64(out, header_text.size());
  out.write(header_text.data(),
            static_cast<std::streamsize>(header_text.size()));
  for (const auto& p : state.params) put_doubles(out, p.tensor.data);
  if (!out) throw IoError("failed writing checkpoint: " + path);
}

models::ModelState load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw ParseError("not a checkpoint file: " + path);
  }
  const std::uint32_t version = get_u32(in);
  if (version != kVersion) {
    throw ParseError("unsupported checkpoint version " +
                     std::to_string(version) + " in " + path);
  }
  const std::uint64_t header_len = get_u64(in);
  std::string header_text(header_len, '\0');
  in.read(header_text.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw ParseError("truncated checkpoint header: " + path);

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("bad checkpoint header in " + path + ": " + e.what());
  }

  models::ModelState state;
  const std::string kind = header.at("kind").get<std::string>();
  const auto& config = header.at("config");
  if (kind == "bilstm") {
    state.kind = models::ModelKind::kBiLstm;
    state.bilstm.embed_dim = config.at("embed_dim").get<int>();
    state.bilstm.hidden = config.at("hidden").get<int>();
    state.bilstm.layers = config.at("layers").get<int>();
    state.bilstm.dropout_keep = config.at("dropout_keep").get<double>();
    state.bilstm.num_classes = config.at("num_classes").get<int>();
  } else if (kind == "cnn") {
    state.kind = models::ModelKind::kCnn;
    state.cnn.embed_dim = config.at("embed_dim").get<int>();
    state.cnn.filter_widths = config.at("filter_widths").get<std::vector<int>>();
    state.cnn.filters_per_width = config.at("filters_per_width").get<int>();
    state.cnn.dropout_keep = config.at("dropout_keep").get<double>();
    state.cnn.num_classes = config.at("num_classes").get<int>();
  } else {
    throw ParseError("unknown model kind '" + kind + "' in " + path);
  }

  auto tokens = header.at("vocab").get<std::vector<std::string>>();
  if (tokens.size() < 2) throw ParseError("checkpoint vocab too small");
  state.vocab = embed::Vocab(
      std::vector<std::string>(tokens.begin() + 2, tokens.end()));
  state.label_set = header.at("label_set").get<std::vector<std::string>>();

  for (const auto& p : header.at("params")) {
    models::NamedParam param;
    param.name = p.at("name").get<std::string>();
    param.tensor = ad::Tensor::zeros(p.at("shape").get<std::vector<int>>(), true);
    get_doubles(in, param.tensor.data);
    state.params.push_back(std::move(param));
  }
  if (!in) throw ParseError("truncated checkpoint data: " + path);
  state.mode = models::Mode::kEval;
  return state;
}

}  // namespace offlang::checkpoint
