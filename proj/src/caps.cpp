#include "leadmetric/caps.hpp"

#include "leadmetric/errors.hpp"

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <mutex>

namespace leadmetric {

namespace {

std::mutex caps_mutex;
bool caps_loaded = false;
Caps current_caps;

}  // namespace

Caps Caps::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, "cannot open caps file");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path, e.what());
    }
    Caps c;
    auto read = [&](const char* key, std::size_t& field) {
        if (!j.contains(key)) return;
        if (!j[key].is_number_unsigned()) throw ParseError(path + ":" + key, "expected a nonnegative integer");
        field = j[key].get<std::size_t>();
    };
    read("max_ball_radius", c.max_ball_radius);
    read("max_bfs_radius", c.max_bfs_radius);
    read("max_ground_size", c.max_ground_size);
    read("max_cylinder_support", c.max_cylinder_support);
    read("max_set_size", c.max_set_size);
    read("max_tile_size", c.max_tile_size);
    read("max_image_closure", c.max_image_closure);
    return c;
}

Caps Caps::from_environment() {
    if (const char* path = std::getenv("LEADMETRIC_CAPS"); path != nullptr && *path != '\0') {
        return from_file(path);
    }
    return Caps{};
}

const Caps& caps() {
    std::lock_guard lock(caps_mutex);
    if (!caps_loaded) {
        current_caps = Caps::from_environment();
        caps_loaded = true;
    }
    return current_caps;
}

void set_caps(const Caps& c) {
    std::lock_guard lock(caps_mutex);
    current_caps = c;
    caps_loaded = true;
}

}  // namespace leadmetric
