// Copyright 2026 The vec2sent Authors.
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

#ifndef V2S_SERIALIZATION_HPP
#define V2S_SERIALIZATION_HPP

#include <json.hpp>

#include "v2s/decoder.hpp"
#include "v2s/decoder_config.hpp"
#include "v2s/encoders.hpp"

// JSON mappings for configuration types, found by nlohmann::json via ADL.
namespace v2s {

void to_json(nlohmann::json& j, const DecoderConfig& c);
void from_json(const nlohmann::json& j, DecoderConfig& c);

void to_json(nlohmann::json& j, const EncoderSpec& s);
void from_json(const nlohmann::json& j, EncoderSpec& s);

void to_json(nlohmann::json& j, const TrainingOptions& o);
void from_json(const nlohmann::json& j, TrainingOptions& o);

void to_json(nlohmann::json& j, const TrainingMeta& m);
void from_json(const nlohmann::json& j, TrainingMeta& m);

}  // namespace v2s

#endif  // V2S_SERIALIZATION_HPP
