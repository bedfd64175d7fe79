#pragma once

#include "gevitrec/catalog.hpp"
#include "gevitrec/chartspec.hpp"
#include "gevitrec/combine.hpp"
#include "gevitrec/csv.hpp"
#include "gevitrec/dataset.hpp"
#include "gevitrec/entity_graph.hpp"
#include "gevitrec/entity_graph_svg.hpp"
#include "gevitrec/error.hpp"
#include "gevitrec/fields.hpp"
#include "gevitrec/layout.hpp"
#include "gevitrec/newick.hpp"
#include "gevitrec/pipeline.hpp"
#include "gevitrec/ranking.hpp"
#include "gevitrec/render.hpp"
#include "gevitrec/svg.hpp"
#include "gevitrec/text.hpp"
