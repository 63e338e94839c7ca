#pragma once

// Pose mathematics and multi-cube configuration analysis.

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "tcube/model.hpp"

namespace tcube {

struct SpatialParams {
  double contact_gap_max = 0.005;       // meters between facing faces
  double lateral_offset_max = 0.25;     // fraction of edge
  double antiparallel_max_deg = 15.0;   // facing-face normal tolerance
  double lattice_tolerance = 0.30;      // fraction of edge
  double cube_edge = 0.033;             // edge length of tracked cubes
};

/// Geometric state of one tracked cube.
struct CubeState {
  CubeId id;
  double edge = 0.033;
  Pose pose;
};

enum class ContactKind : std::uint8_t { neighbor, stacked };

struct ContactRelation {
  CubeId a;
  CubeId b;
  ContactKind kind = ContactKind::neighbor;
  bool a_below = false;  // meaningful for stacked
  double gap = 0.0;
  double lateral_offset = 0.0;
  friend bool operator==(const ContactRelation&, const ContactRelation&) = default;
};

struct ContactGraph {
  std::vector<CubeId> nodes;            // ascending
  std::vector<ContactRelation> edges;   // a < b, ordered by (a, b)
  friend bool operator==(const ContactGraph&, const ContactGraph&) = default;
};

enum class ComponentKind : std::uint8_t { single, pair_neighbor, column_stack, assembly };
std::string_view to_string(ComponentKind k);

struct LatticeCoord {
  int x = 0, y = 0, z = 0;
  friend auto operator<=>(const LatticeCoord&, const LatticeCoord&) = default;
};

struct Component {
  std::vector<CubeId> members;          // ascending
  ComponentKind kind = ComponentKind::single;
  std::vector<LatticeCoord> lattice;    // parallel to members
  friend bool operator==(const Component&, const Component&) = default;
};

struct ConfigurationSummary {
  std::vector<Component> components;    // ordered by first member
  friend bool operator==(const ConfigurationSummary&, const ConfigurationSummary&) = default;

  const Component* component_of(CubeId id) const;
  std::vector<CubeId> universe() const;
};

struct TimedPosition {
  Seconds t = 0.0;
  Vec3 position;
};

/// Face whose outward normal has the largest world z component; ties are
/// resolved in the order +Z, -Z, +X, -X, +Y, -Y.
Face dominant_face(const Pose& pose);

/// Face-contact test between two equally sized cubes. Throws
/// Error{unsupported_configuration} when edge lengths differ.
std::optional<ContactRelation> contact_relation(const CubeState& a, const CubeState& b,
                                                const SpatialParams& params);

ContactGraph build_contact_graph(std::span<const CubeState> states, const SpatialParams& params);

/// Labels connected components. Lattice coordinates are expressed in the
/// body frame of each component's lowest-id member, in edge units, with
/// the body axis nearest to world up taken as z. Throws
/// Error{degenerate_configuration} when a member is off-lattice.
ConfigurationSummary classify_components(const ContactGraph& graph,
                                         std::span<const CubeState> states,
                                         const SpatialParams& params);

/// Negated least-squares slope of the center distance over the trailing
/// `window` seconds; positive when the cubes approach each other.
/// Throws Error{insufficient_history} with fewer than two samples per cube
/// inside the window.
double relative_approach_speed(std::span<const TimedPosition> hist_a,
                               std::span<const TimedPosition> hist_b, Seconds window);

/// Lowest and highest world z over the cube's eight corners.
double bottom_z(const Pose& pose, double edge);
double top_z(const Pose& pose, double edge);

}  // namespace tcube
