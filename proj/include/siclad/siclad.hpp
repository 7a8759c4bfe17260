#pragma once

#include "siclad/csv.hpp"
#include "siclad/dbscan.hpp"
#include "siclad/errors.hpp"
#include "siclad/experiments.hpp"
#include "siclad/gaussian.hpp"
#include "siclad/hypothesis.hpp"
#include "siclad/intervals.hpp"
#include "siclad/model.hpp"
#include "siclad/pipeline.hpp"
#include "siclad/pvalue.hpp"
#include "siclad/region.hpp"
