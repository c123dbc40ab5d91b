#pragma once

#include "predictive/asymptotics.hpp"
#include "predictive/diagnostics.hpp"
#include "predictive/engine.hpp"
#include "predictive/error.hpp"
#include "predictive/json.hpp"
#include "predictive/measure.hpp"
#include "predictive/newton.hpp"
#include "predictive/ogd.hpp"
#include "predictive/point.hpp"
#include "predictive/random.hpp"
#include "predictive/resampling.hpp"
#include "predictive/rules/ibp.hpp"
#include "predictive/rules/iid.hpp"
#include "predictive/rules/kernel_dirichlet.hpp"
#include "predictive/rules/polya.hpp"
#include "predictive/rules/recency.hpp"
#include "predictive/rules/species.hpp"
#include "predictive/special.hpp"
#include "predictive/structured/franchise.hpp"
#include "predictive/structured/graphon.hpp"
#include "predictive/structured/ihmm.hpp"
#include "predictive/structured/oracle.hpp"
#include "predictive/structured/pcid.hpp"
#include "predictive/structured/reinforced.hpp"
