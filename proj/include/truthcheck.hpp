/*
 * Copyright 2026 The truthcheck Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Umbrella header.

#include "truthcheck/argumentation.hpp"
#include "truthcheck/benchmark.hpp"
#include "truthcheck/config.hpp"
#include "truthcheck/datamodel.hpp"
#include "truthcheck/errors.hpp"
#include "truthcheck/importance.hpp"
#include "truthcheck/investigator.hpp"
#include "truthcheck/model_io.hpp"
#include "truthcheck/models.hpp"
#include "truthcheck/rng.hpp"
#include "truthcheck/selector.hpp"
#include "truthcheck/subprocess_predictor.hpp"
