// Copyright 2026 The satd Authors.
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

#include "satd/baselines.hpp"
#include "satd/checkpoint.hpp"
#include "satd/common.hpp"
#include "satd/corpus.hpp"
#include "satd/embedding.hpp"
#include "satd/keywords.hpp"
#include "satd/linker.hpp"
#include "satd/metrics.hpp"
#include "satd/model.hpp"
#include "satd/report.hpp"
#include "satd/rng.hpp"
#include "satd/stats.hpp"
#include "satd/train_eval.hpp"
