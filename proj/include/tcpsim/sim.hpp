#ifndef TCPSIM_SIM_HPP
#define TCPSIM_SIM_HPP

// Umbrella header pulling in the whole simulator.

#include "tcpsim/cbr.hpp"
#include "tcpsim/config.hpp"
#include "tcpsim/engine.hpp"
#include "tcpsim/experiments.hpp"
#include "tcpsim/metrics.hpp"
#include "tcpsim/network.hpp"
#include "tcpsim/packet.hpp"
#include "tcpsim/queue.hpp"
#include "tcpsim/rng.hpp"
#include "tcpsim/scenario.hpp"
#include "tcpsim/tcp.hpp"
#include "tcpsim/time.hpp"
#include "tcpsim/topology.hpp"
#include "tcpsim/trace.hpp"

#endif
