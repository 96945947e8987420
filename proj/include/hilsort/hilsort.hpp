// Copyright 2026 The hilsort Authors.
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

#include "hilsort/config.hpp"
#include "hilsort/correlation.hpp"
#include "hilsort/error.hpp"
#include "hilsort/formats.hpp"
#include "hilsort/merge_machine.hpp"
#include "hilsort/preorder.hpp"
#include "hilsort/rating.hpp"
#include "hilsort/rng.hpp"
#include "hilsort/session.hpp"
#include "hilsort/simulator.hpp"
#include "hilsort/sorter.hpp"
#include "hilsort/store.hpp"
