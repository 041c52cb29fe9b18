// Copyright 2026 The FGC Authors. All Rights Reserved.
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
// =============================================================================

#ifndef FGC_CLI_H_
#define FGC_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace fgc::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kDataError = 2,
  kInfeasible = 3,  // cost model infeasible or simulator divergence
};

// Runs one subcommand. `args` excludes the program name. The JSON summary
// goes to `out`, diagnostics and usage text to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fgc::cli

#endif  // FGC_CLI_H_
