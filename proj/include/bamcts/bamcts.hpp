// Copyright 2026 The bamcts Authors
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

#include "bamcts/belief_mdp.hpp"
#include "bamcts/core.hpp"
#include "bamcts/filter/ekf.hpp"
#include "bamcts/harness/config_file.hpp"
#include "bamcts/harness/experiment.hpp"
#include "bamcts/harness/sweep.hpp"
#include "bamcts/models/double_integrator.hpp"
#include "bamcts/models/planar_manipulation.hpp"
#include "bamcts/planners/convex_program.hpp"
#include "bamcts/planners/mcts_dpw.hpp"
#include "bamcts/planners/mpc.hpp"
