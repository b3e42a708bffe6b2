#pragma once

#include "benchlite/core_model.hpp"
#include "benchlite/error.hpp"
#include "benchlite/ingestion.hpp"
#include "benchlite/mock_executor.hpp"
#include "benchlite/orchestrator.hpp"
#include "benchlite/rank_analysis.hpp"
#include "benchlite/ranking.hpp"
#include "benchlite/repository.hpp"
