// Copyright 2026 The botscreen Authors
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

/// @file botscreen.hpp
/// Umbrella header.

#include "botscreen/core.hpp"
#include "botscreen/text.hpp"
#include "botscreen/lexicon.hpp"
#include "botscreen/corpus.hpp"
#include "botscreen/synthetic.hpp"
#include "botscreen/features.hpp"
#include "botscreen/topics.hpp"
#include "botscreen/smote.hpp"
#include "botscreen/gbm.hpp"
#include "botscreen/eval.hpp"
#include "botscreen/botometer.hpp"
#include "botscreen/pipeline.hpp"
