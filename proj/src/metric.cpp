// Copyright 2026 The robustrag Authors
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

#include "robustrag/metric.hpp"

#include "robustrag/text.hpp"

namespace robustrag {

QualityScore metric_substring(const Response& response, const ReferenceAnswer& answer) {
  const std::string hay = text::normalize(response.text);
  for (const auto& a : answer.accepted()) {
    const std::string needle = text::normalize(a);
    if (!needle.empty() && hay.find(needle) != std::string::npos) return QualityScore(1.0);
  }
  return QualityScore(0.0);
}

}  // namespace robustrag
