#pragma once

#include "panfis/dataio.hpp"
#include "panfis/errors.hpp"
#include "panfis/fusion.hpp"
#include "panfis/inference.hpp"
#include "panfis/learner.hpp"
#include "panfis/orchestrator.hpp"
#include "panfis/report.hpp"
#include "panfis/rule_model.hpp"
