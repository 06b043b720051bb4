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

#ifndef V2S_TESTS_SYNTHETIC_HPP
#define V2S_TESTS_SYNTHETIC_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "v2s/corpus.hpp"

namespace v2s::testing {

/// Sentences from a small template grammar:
///   the [subj-adj] subj verb the [obj-adj] obj [adverb]
/// Every slot draws from its own word list, so a sentence's bag of words
/// determines its order. At most 8 tokens, 61 distinct words.
/// With `shared_roles`, subject and object (and their adjectives) draw from
/// one pool, so "the cook sees the car" and "the car sees the cook" are
/// permutations of each other.
std::vector<std::string> template_sentences(std::size_t count, std::uint64_t seed, bool shared_roles = false);

/// Vocabulary of every word the grammar can produce.
Vocabulary template_vocabulary();

}  // namespace v2s::testing

#endif  // V2S_TESTS_SYNTHETIC_HPP
