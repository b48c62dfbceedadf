#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ias/fitter.hpp"
#include "ias/scene.hpp"

namespace ias {

struct Rgb {
    std::uint8_t r = 255, g = 255, b = 255;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Row-major RGB8 image, top row first.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;

    Image() = default;
    Image(int w, int h, Rgb fill = {});
    Rgb at(int x, int y) const;
    void set(int x, int y, Rgb c);
};

/// Binary PPM (P6, maxval 255).
void write_ppm(const Image& img, const std::filesystem::path& path);
std::string encode_ppm(const Image& img);

struct Camera {
    Vec3 eye{0, 0, -3};
    Vec3 look_at{0, 0, 0};
    Vec3 up{0, 1, 0};
    double vertical_fov = 40.0;  // degrees
    int width = 256;
    int height = 256;

    /// Throws InvalidArgument on a bad fov, size, or up parallel to the view direction.
    void validate() const;
    /// Unit direction of the primary ray through pixel center (px + sx, py + sy), s in [0, 1).
    Vec3 ray_dir(double px, double py) const;
};

enum class RenderMode { lambert, primitive_id, normal_map };

RenderMode parse_render_mode(const std::string& name);

struct RenderOptions {
    RenderMode mode = RenderMode::lambert;
    bool supersample = false;  // 2×2 per pixel
};

inline constexpr Rgb kBackground{255, 255, 255};
/// Base color modulated by the headlight term in lambert mode.
inline constexpr double kAlbedo[3] = {0.80, 0.82, 0.90};

/// Fixed 100-entry palette: hues spread by the golden-ratio conjugate, S = 0.65, V = 0.95.
Rgb primitive_color(int index);

/// 0.1 ambient plus 0.9·max(0, n·l).
double lambert_intensity(const Vec3& normal, const Vec3& to_light);

/// One primary ray per pixel (four with supersampling); misses are white.
Image render(const Scene& scene, const Camera& cam, const RenderOptions& opt = {});

namespace serial {
Image render(const Scene& scene, const Camera& cam, const RenderOptions& opt = {});
}

/// Line plot of the loss history on a log scale: total (black), sign (blue), normal (red).
Image plot_loss_curve(const LossReport& report, int width = 640, int height = 360);

}  // namespace ias
