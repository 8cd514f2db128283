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

#pragma once

#include <functional>

#include "robustrag/core.hpp"

namespace robustrag {

/// Response quality against a reference answer. Any scorer returning a
/// value in [0, 1] can be plugged into certification and reporting.
using Metric = std::function<QualityScore(const Response&, const ReferenceAnswer&)>;

/// 1 when any accepted string occurs in the response, comparing
/// case-insensitively after collapsing whitespace; 0 otherwise.
QualityScore metric_substring(const Response& response, const ReferenceAnswer& answer);

}  // namespace robustrag
