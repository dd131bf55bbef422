// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "agent.hpp"
#include "backend.hpp"
#include "bench.hpp"
#include "classify.hpp"
#include "config.hpp"
#include "dsl/interpreter.hpp"
#include "dsl/parser.hpp"
#include "dsl/unparse.hpp"
#include "ensemble.hpp"
#include "error.hpp"
#include "evaluation.hpp"
#include "http_backend.hpp"
#include "scene.hpp"
#include "scene_api.hpp"
#include "spatial.hpp"
#include "text.hpp"
