// Copyright 2026 The FocusLite Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "focuslite/bench.hpp"
#include "focuslite/data.hpp"
#include "focuslite/errors.hpp"
#include "focuslite/evaluation.hpp"
#include "focuslite/heatmap.hpp"
#include "focuslite/image_io.hpp"
#include "focuslite/metrics.hpp"
#include "focuslite/model.hpp"
#include "focuslite/parallel.hpp"
#include "focuslite/random.hpp"
#include "focuslite/tensor.hpp"
#include "focuslite/training.hpp"
