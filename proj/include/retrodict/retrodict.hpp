// Copyright (c) 2026 The retrodict developers.
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

// Umbrella header: pulls in the whole library.

#pragma once

#include "retrodict/device_model.hpp"
#include "retrodict/errors.hpp"
#include "retrodict/evolution.hpp"
#include "retrodict/experiment_sim.hpp"
#include "retrodict/io.hpp"
#include "retrodict/operator_core.hpp"
#include "retrodict/probability_engine.hpp"
#include "retrodict/rng.hpp"
#include "retrodict/scenarios.hpp"
