#pragma once

#include <string>
#include <vector>

#include "rtsim/event.hpp"
#include "rtsim/model.hpp"

namespace rtsim {

// Trace checkers. Each returns one line per problem found (capped at a
// few dozen); an empty result means the property holds. They read only the
// event list, the processor accounts and the scenario, never engine state.

using Findings = std::vector<std::string>;

/// Per resource, no two CS_ACQUIRE..CS_RELEASE intervals overlap.
Findings audit_mutual_exclusion(const Trace& trace);

/// Time and sequence ordering, REQUEST -> ACQUIRE -> RELEASE per job and
/// resource, no request while the job waits for or holds another resource,
/// OVERHEAD_BEGIN/END pairing, one release and at most one
/// completion per job.
Findings audit_event_legality(const Trace& trace);

/// Static-ceiling protocols (MPCP, DPCP): the owner's priority equals the
/// ceiling on every event it emits between acquisition and release, and
/// each hand-off goes to the waiter with the most urgent base priority
/// (earliest request among equals).
Findings audit_ceiling_and_grant_order(const Trace& trace, const Scenario& scenario);

/// FIFO protocols: acquisition order per resource equals request order.
/// FMLP-S additionally: no PREEMPT of a job while it owns a resource.
Findings audit_fifo(const Trace& trace, const Scenario& scenario);

/// Distributed protocols: CS_ACQUIRE/CS_RELEASE only on synchronization
/// processors, the job sits on the resource's synchronization processor
/// when it requests, MIGRATE_BACK follows a release exactly when
/// non-critical work remains, and completed jobs migrate exactly as often
/// as their section layout requires.
Findings audit_locality(const Trace& trace, const Scenario& scenario);

/// Per processor execution + spin + overhead + idle == horizon, the
/// accounts agree with an event replay, job execution sums to processor
/// execution, and suspension-based protocols never spin.
Findings audit_conservation(const Trace& trace, const Scenario& scenario);

/// Every applicable check above.
Findings audit_all(const Trace& trace, const Scenario& scenario);

}  // namespace rtsim
