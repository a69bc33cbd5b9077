// Copyright 2026 The pbtsim Authors
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

#include "pbt/address.hpp"
#include "pbt/baselines.hpp"
#include "pbt/coordinate.hpp"
#include "pbt/credit.hpp"
#include "pbt/embedding.hpp"
#include "pbt/errors.hpp"
#include "pbt/graph.hpp"
#include "pbt/policy.hpp"
#include "pbt/records.hpp"
#include "pbt/routing.hpp"
#include "pbt/sim.hpp"
#include "pbt/stabilization.hpp"
#include "pbt/workload.hpp"
