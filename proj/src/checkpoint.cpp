/*
 * Copyright 2026 The hjoint Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "hjoint/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "binary_io.hpp"
#include "hjoint/error.hpp"

namespace hjoint {

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'H', 'J', 'M', '1'};

}  // namespace

json checkpoint_header(const JointModel& model) {
  const ModelConfig& c = model.config();
  const LabelSpace& labels = model.labels();
  json tensors = json::array();
  for (const Parameter* p : model.parameters()) {
    tensors.push_back({{"name", p->name()}, {"shape", p->value().shape()}});
  }
  json encoder = {{"mode", encoder_mode_name(c.encoder_mode)}};
  if (c.encoder_mode == EncoderMode::kBuiltin) {
    encoder["buckets"] = c.encoder.buckets;
    encoder["orders"] = c.encoder.orders;
  }
  return {
      {"format_version", kCheckpointVersion},
      {"dims", {{"H", c.dim}, {"M", labels.num_domains()}, {"N", labels.num_intents()}}},
      {"structure", structure_name(c.structure)},
      {"heads", head_mode_name(c.heads)},
      {"encoder", std::move(encoder)},
      {"labels", {{"domain_map", domain_map_to_json(labels.domain_map())}}},
      {"tensors", std::move(tensors)},
  };
}

void write_checkpoint(std::ostream& out, const JointModel& model) {
  const std::string header = checkpoint_header(model).dump();
  out.write(kMagic, 4);
  binio::put_u32(out, static_cast<std::uint32_t>(header.size()));
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  for (const Parameter* p : model.parameters()) {
    for (double v : p->value().values()) binio::put_f32(out, static_cast<float>(v));
  }
}

void save_checkpoint(const std::filesystem::path& path, const JointModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  write_checkpoint(out, model);
  if (!out) throw DataError("write failed for checkpoint " + path.string());
}

JointModel read_checkpoint(std::istream& in) {
  binio::Reader r(in);
  char magic[4];
  r.bytes(magic, 4, "magic");
  if (!std::equal(magic, magic + 4, kMagic)) throw FormatError("bad HJM1 magic", 0);
  const std::uint32_t header_len = r.u32("header length");
  const std::uint64_t header_offset = r.offset();
  const std::string header_text = r.string(header_len, "header");

  json h;
  ModelConfig config;
  LabelSpace labels;
  std::vector<std::pair<std::string, std::vector<std::size_t>>> declared;
  try {
    h = json::parse(header_text);
    if (h.at("format_version").get<int>() != kCheckpointVersion) {
      throw FormatError("unsupported checkpoint version", header_offset);
    }
    config.dim = h.at("dims").at("H").get<std::size_t>();
    config.structure = parse_structure(h.at("structure").get<std::string>());
    config.heads = parse_head_mode(h.at("heads").get<std::string>());
    const json& enc = h.at("encoder");
    config.encoder_mode = parse_encoder_mode(enc.at("mode").get<std::string>());
    if (config.encoder_mode == EncoderMode::kBuiltin) {
      config.encoder.buckets = enc.at("buckets").get<std::uint32_t>();
      config.encoder.orders = enc.at("orders").get<std::vector<int>>();
    }
    config.encoder.dim = config.dim;
    labels = LabelSpace::from_domain_map(parse_domain_map(h.at("labels").at("domain_map")));
    if (labels.num_domains() != h.at("dims").at("M").get<std::size_t>() ||
        labels.num_intents() != h.at("dims").at("N").get<std::size_t>()) {
      throw FormatError("label space does not match declared dims", header_offset);
    }
    for (const json& t : h.at("tensors")) {
      declared.emplace_back(t.at("name").get<std::string>(),
                            t.at("shape").get<std::vector<std::size_t>>());
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed checkpoint header: ") + e.what(), header_offset);
  } catch (const Error& e) {
    if (dynamic_cast<const FormatError*>(&e)) throw;
    throw FormatError(std::string("invalid checkpoint header: ") + e.what(), header_offset);
  }

  JointModel model(config, std::move(labels));
  if (config.encoder_mode == EncoderMode::kBuiltin) {
    model.encoder_.emplace(config.encoder,
                           Tensor::zeros({config.encoder.buckets, config.dim}));
  }
  std::vector<Parameter*> params = model.parameters();
  if (declared.size() != params.size()) {
    throw FormatError("checkpoint declares " + std::to_string(declared.size()) +
                          " tensors, model expects " + std::to_string(params.size()),
                      header_offset);
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter* p = params[i];
    if (declared[i].first != p->name() || declared[i].second != p->value().shape()) {
      throw FormatError("tensor " + std::to_string(i) + " (" + declared[i].first +
                            ") does not match expected " + p->name() + " " +
                            p->value().shape_string(),
                        header_offset);
    }
    for (double& v : p->value().values()) v = static_cast<double>(r.f32(p->name().c_str()));
  }
  if (!r.at_end()) throw FormatError("trailing bytes after checkpoint tensors", r.offset());
  return model;
}

JointModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace hjoint
