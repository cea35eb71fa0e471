#pragma once

#include <cstddef>
#include <string>

namespace leadmetric {

/// Resource caps shared by every potentially exponential computation.
/// Loaded from the JSON file named by $LEADMETRIC_CAPS when present.
struct Caps {
    std::size_t max_ball_radius = 64;
    std::size_t max_bfs_radius = 24;  // H3 word-length memo depth
    std::size_t max_ground_size = 1u << 16;
    std::size_t max_cylinder_support = 8;
    std::size_t max_set_size = 2'000'000;
    std::size_t max_tile_size = 1'000'000;
    std::size_t max_image_closure = 200'000;

    static Caps from_file(const std::string& path);
    /// Defaults overridden by $LEADMETRIC_CAPS, if set.
    static Caps from_environment();
};

/// Process-wide caps; initialised lazily from the environment.
const Caps& caps();
void set_caps(const Caps& c);

}  // namespace leadmetric
