#pragma once

#include "supercomm/compression.hpp"
#include "supercomm/config.hpp"
#include "supercomm/error.hpp"
#include "supercomm/experiments.hpp"
#include "supercomm/generator.hpp"
#include "supercomm/graph.hpp"
#include "supercomm/louvain.hpp"
#include "supercomm/metrics.hpp"
#include "supercomm/parallel.hpp"
#include "supercomm/partition.hpp"
#include "supercomm/pipeline.hpp"
#include "supercomm/report.hpp"
#include "supercomm/rng.hpp"
#include "supercomm/sbm.hpp"
#include "supercomm/seeding.hpp"
