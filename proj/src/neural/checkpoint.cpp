// Copyright 2026 The DualTOD Authors
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

#include "dualtod/neural/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "dualtod/error.hpp"

namespace dualtod::nn {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[8] = {'D', 'T', 'O', 'D', 'C', 'K', 'P', '1'};

template <class T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

struct Reader {
  const std::string& in;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (in.size() - pos < n) throw ParseError(0, "checkpoint truncated");
  }
  template <class T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, in.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
  }
};

}  // namespace

std::string serialize_checkpoint(const Seq2SeqModel& model, const Vocab& vocab,
                                 const OrderedJson& meta) {
  OrderedJson manifest;
  manifest["config"] = model.config().to_json();
  OrderedJson blocks = OrderedJson::array();
  for (const ParamBlock& b : model.blocks())
    blocks.push_back({{"name", b.name}, {"offset", b.offset}, {"rows", b.rows},
                      {"cols", b.cols}});
  manifest["blocks"] = std::move(blocks);
  manifest["vocab"] = vocab.tokens();
  manifest["meta"] = meta;
  const std::string text = manifest.dump();

  std::string out(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, text.size());
  out += text;
  const auto params = model.params();
  put<std::uint64_t>(out, params.size());
  out.append(reinterpret_cast<const char*>(params.data()),
             params.size() * sizeof(double));
  return out;
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  Reader r{bytes};
  r.need(sizeof(kMagic));
  if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
    throw ParseError(0, "not a checkpoint file");
  r.pos = sizeof(kMagic);
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion)
    throw ParseError(0, "unsupported checkpoint version " + std::to_string(version));
  const auto json_len = r.get<std::uint64_t>();
  r.need(json_len);
  OrderedJson manifest;
  try {
    manifest = OrderedJson::parse(bytes.substr(r.pos, json_len));
  } catch (const OrderedJson::exception& e) {
    throw ParseError(0, std::string("checkpoint manifest: ") + e.what());
  }
  r.pos += json_len;

  const ModelConfig cfg = ModelConfig::from_json(Json::parse(manifest.at("config").dump()));
  Vocab vocab(manifest.at("vocab").get<std::vector<std::string>>());
  if (vocab.size() != cfg.vocab_size)
    throw ParseError(0, "checkpoint vocabulary does not match the config");
  Seq2SeqModel model(cfg);
  const auto& blocks = manifest.at("blocks");
  if (blocks.size() != model.blocks().size())
    throw ParseError(0, "checkpoint block table does not match the config");
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const ParamBlock& b = model.blocks()[i];
    if (blocks[i].at("name") != b.name || blocks[i].at("offset") != b.offset ||
        blocks[i].at("rows") != b.rows || blocks[i].at("cols") != b.cols)
      throw ParseError(0, "checkpoint block mismatch at " + b.name);
  }
  const auto n = r.get<std::uint64_t>();
  if (n != model.num_params())
    throw ParseError(0, "checkpoint parameter count mismatch");
  r.need(n * sizeof(double));
  std::memcpy(model.params().data(), bytes.data() + r.pos, n * sizeof(double));
  r.pos += n * sizeof(double);
  if (r.pos != bytes.size()) throw ParseError(0, "trailing bytes in checkpoint");

  OrderedJson meta =
      manifest.contains("meta") ? manifest["meta"] : OrderedJson::object();
  return {std::move(model), std::move(vocab), std::move(meta)};
}

void save_checkpoint(const std::filesystem::path& path,
                     const Seq2SeqModel& model, const Vocab& vocab,
                     const OrderedJson& meta) {
  write_file_atomic(path, serialize_checkpoint(model, vocab, meta));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return deserialize_checkpoint(read_file(path));
}

}  // namespace dualtod::nn
