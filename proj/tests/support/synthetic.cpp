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

#include "synthetic.hpp"

#include <random>
#include <set>

namespace v2s::testing {

namespace {

const std::vector<std::string> kSubjAdj = {"old", "young", "tall", "quiet", "happy", "angry", "clever", "lazy"};
const std::vector<std::string> kSubj = {"farmer", "doctor", "teacher", "pilot", "singer", "baker",
                                        "lawyer", "nurse",  "painter", "driver", "writer", "cook"};
const std::vector<std::string> kVerb = {"sees",   "likes", "paints", "buys",  "sells", "finds",
                                        "builds", "wants", "cleans", "moves", "opens", "draws"};
const std::vector<std::string> kObjAdj = {"red", "blue", "small", "large", "green", "heavy", "cheap", "shiny"};
const std::vector<std::string> kObj = {"house", "car",  "boat",  "table", "chair", "lamp",
                                       "door",  "book", "clock", "bike",  "fence", "window"};
const std::vector<std::string> kAdverb = {"today", "again", "slowly", "quickly", "often", "twice", "now", "daily"};

const std::string& pick(const std::vector<std::string>& words, std::mt19937_64& rng) {
  return words[rng() % words.size()];
}

}  // namespace

std::vector<std::string> template_sentences(std::size_t count, std::uint64_t seed, bool shared_roles) {
  static const auto adjectives = [] {
    auto all = kSubjAdj;
    all.insert(all.end(), kObjAdj.begin(), kObjAdj.end());
    return all;
  }();
  static const auto nouns = [] {
    auto all = kSubj;
    all.insert(all.end(), kObj.begin(), kObj.end());
    return all;
  }();
  const auto& subj_adj = shared_roles ? adjectives : kSubjAdj;
  const auto& obj_adj = shared_roles ? adjectives : kObjAdj;
  const auto& subj = shared_roles ? nouns : kSubj;
  const auto& obj = shared_roles ? nouns : kObj;
  std::mt19937_64 rng(seed);
  std::set<std::string> seen;
  std::vector<std::string> out;
  while (out.size() < count) {
    std::string s = "the ";
    if (rng() % 2) s += pick(subj_adj, rng) + " ";
    s += pick(subj, rng) + " " + pick(kVerb, rng) + " the ";
    if (rng() % 2) s += pick(obj_adj, rng) + " ";
    s += pick(obj, rng);
    if (rng() % 2) s += " " + pick(kAdverb, rng);
    if (seen.insert(s).second) out.push_back(s);
  }
  return out;
}

Vocabulary template_vocabulary() {
  auto tokens = Vocabulary::special_tokens();
  tokens.push_back("the");
  for (const auto* list : {&kSubjAdj, &kSubj, &kVerb, &kObjAdj, &kObj, &kAdverb}) {
    tokens.insert(tokens.end(), list->begin(), list->end());
  }
  return Vocabulary(tokens);
}

}  // namespace v2s::testing
