#pragma once

#include "relaysel/analysis.hpp"
#include "relaysel/chain.hpp"
#include "relaysel/config.hpp"
#include "relaysel/errors.hpp"
#include "relaysel/info_forwarding.hpp"
#include "relaysel/location_error.hpp"
#include "relaysel/metrics.hpp"
#include "relaysel/mobility.hpp"
#include "relaysel/model.hpp"
#include "relaysel/montecarlo.hpp"
#include "relaysel/parallel.hpp"
#include "relaysel/policy.hpp"
#include "relaysel/radio.hpp"
#include "relaysel/relay_policy.hpp"
#include "relaysel/scenario.hpp"
#include "relaysel/stationary.hpp"
#include "relaysel/tables.hpp"
