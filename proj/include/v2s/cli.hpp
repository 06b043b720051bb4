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

#ifndef V2S_CLI_HPP
#define V2S_CLI_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "v2s/decoder.hpp"
#include "v2s/decoder_config.hpp"

namespace v2s {

/// Everything a run needs. Loaded from --config, then overridden by flags;
/// the effective config is written to <out>/run_config.json.
struct RunConfig {
  std::string corpus;         // training corpus, one sentence per line
  std::string eval_corpus;    // evaluation corpus (diagnose); defaults to corpus
  std::string vocab;          // vocabulary file
  std::string embeddings;     // token embeddings, word2vec text format
  std::string checkpoint;     // decoder checkpoint
  std::string out_dir;
  std::string encoder = "avg";
  std::size_t max_len = 15;
  std::size_t min_freq = 1;
  std::size_t max_vocab = 50000;
  int random_embeddings = 0;  // >0: draw token vectors of this width instead of loading them
  std::size_t eval_limit = 0; // 0 = whole evaluation corpus
  std::string mover_scores;   // JSONL of {input, output, score}
  int beam_width = 1;         // 1 = greedy
  DecoderConfig decoder;
  TrainingOptions training;
  std::uint64_t seed = 1;
};

void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);

RunConfig load_run_config(const std::string& path);
void save_run_config(const RunConfig& config, const std::string& path);

/// Runs one subcommand. Returns 0 on success, 2 on usage errors and 1 on
/// any other failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, std::istream& in);
int run(int argc, char** argv);

}  // namespace v2s

#endif  // V2S_CLI_HPP
