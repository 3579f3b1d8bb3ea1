#ifndef DIFFGRAPH_DIFFGRAPH_HPP_
#define DIFFGRAPH_DIFFGRAPH_HPP_

#include "diffgraph/error.hpp"
#include "diffgraph/graph.hpp"
#include "diffgraph/operators.hpp"
#include "diffgraph/semigroup.hpp"
#include "diffgraph/order_iso.hpp"
#include "diffgraph/lp.hpp"
#include "diffgraph/gst.hpp"
#include "diffgraph/recurrence.hpp"

#endif  // DIFFGRAPH_DIFFGRAPH_HPP_
