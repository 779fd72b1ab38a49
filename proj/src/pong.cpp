#include "colanet/pong.hpp"

#include <cmath>

namespace colanet {

WorldEvent step_world(WorldState& s) {
    s.ball_x += s.ball_vx * kWorldDt;
    s.ball_y += s.ball_vy * kWorldDt;

    if (s.ball_y > kFieldHalf) {
        s.ball_y = 2.0 * kFieldHalf - s.ball_y;
        s.ball_vy = -s.ball_vy;
    } else if (s.ball_y < -kFieldHalf) {
        s.ball_y = -2.0 * kFieldHalf - s.ball_y;
        s.ball_vy = -s.ball_vy;
    }

    if (s.ball_x > kFieldHalf) {
        s.ball_x = 2.0 * kFieldHalf - s.ball_x;
        s.ball_vx = -s.ball_vx;
    } else if (s.ball_x < -kFieldHalf) {
        if (std::abs(s.ball_y - s.racket_y) <= kRacketHalf) {
            s.ball_x = -2.0 * kFieldHalf - s.ball_x;
            s.ball_vx = -s.ball_vx;
            return WorldEvent::hit_racket;
        }
        return WorldEvent::hit_left_wall;
    }
    return WorldEvent::none;
}

WorldState reset_world(Rng& rng) {
    WorldState s;
    s.ball_x = 0.0;
    s.ball_y = rng.uniform(-kFieldHalf, kFieldHalf);
    const double speed = rng.uniform(kSpeedMin, kSpeedMax);
    // Direction uniform conditioned on |vx| >= kVxMin, by rejection.
    double vx = 0.0;
    double vy = 0.0;
    do {
        const double theta = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
        vx = speed * std::cos(theta);
        vy = speed * std::sin(theta);
    } while (std::abs(vx) < kVxMin);
    s.ball_vx = vx;
    s.ball_vy = vy;
    s.racket_y = rng.uniform(-(kFieldHalf - kRacketHalf), kFieldHalf - kRacketHalf);
    return s;
}

Label label_state(const WorldState& state, int horizon_ticks) {
    WorldState clone = state;
    for (int t = 0; t < horizon_ticks; ++t) {
        switch (step_world(clone)) {
            case WorldEvent::hit_racket:
                return Label::good;
            case WorldEvent::hit_left_wall:
                return Label::bad;
            case WorldEvent::none:
                break;
        }
    }
    return Label::unlabeled;
}

}  // namespace colanet
