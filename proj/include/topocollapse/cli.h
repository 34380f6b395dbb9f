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

#ifndef TOPOCOLLAPSE_CLI_H
#define TOPOCOLLAPSE_CLI_H

#include <ostream>
#include <string>
#include <vector>

#include "topocollapse/montecarlo.h"

namespace topocollapse {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitUsage = 2;

/// Environment variable naming the default directory for output files.
inline constexpr const char *kOutputDirEnv = "TOPOCOLLAPSE_OUTPUT_DIR";

inline constexpr const char *kCsvHeader = "phi,policy,seed,trials,outcome,count,frequency,analytic_p";

/// One row per (result, outcome) in input order. Throws ConfigError when
/// `results` is empty.
void write_csv(const std::vector<ExperimentResult> &results, std::ostream &out);

/// Entry point behind the topocollapse executable. Returns the exit code.
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

}  // namespace topocollapse

#endif
