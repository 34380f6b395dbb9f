// Copyright 2026 The topocollapse Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TOPOCOLLAPSE_ERROR_H
#define TOPOCOLLAPSE_ERROR_H

#include <stdexcept>

namespace topocollapse {

/// Raised for malformed inputs: unknown modes or regions, dimension
/// mismatches, out-of-range preset parameters, inconsistent scene geometry.
class ConfigError : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace topocollapse

#endif
