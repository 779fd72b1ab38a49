#pragma once

#include <cstdint>

#include "colanet/rng.hpp"

namespace colanet {

// World geometry, in cm. The playing field is a 10x10 square centered on the
// origin; the racket slides on the left border.
inline constexpr double kFieldHalf = 5.0;
inline constexpr double kRacketHalf = 0.9;  // racket size 1.8
inline constexpr double kWorldDt = 0.001;   // 1 tick = 1 msec
inline constexpr double kSpeedMin = 10.0;   // cm/sec
inline constexpr double kSpeedMax = 33.3;
inline constexpr double kVxMin = 10.0;      // |vx| lower bound after reset

struct WorldState {
    double ball_x = 0.0;
    double ball_y = 0.0;
    double ball_vx = 0.0;   // cm/sec
    double ball_vy = 0.0;
    double racket_y = 0.0;  // racket center
};

enum class WorldEvent : std::uint8_t { none, hit_racket, hit_left_wall };

/// Advances the world by one tick. Elastic reflection off the top, bottom
/// and right walls (position mirrored about the wall within the same tick);
/// at the left border the ball either bounces off the racket or the crossing
/// is reported. The racket never moves.
WorldEvent step_world(WorldState& state);

/// Random episode start: ball on the middle vertical line, speed in
/// [10, 33.3], direction uniform subject to |vx| >= 10, racket fully inside
/// the field.
WorldState reset_world(Rng& rng);

enum class Label : std::uint8_t { good, bad, unlabeled };

/// Frozen-racket lookahead: clones the state and simulates up to
/// horizon_ticks. good if the ball hits the racket first, bad if it crosses
/// the left wall, unlabeled if neither happens within the horizon.
Label label_state(const WorldState& state, int horizon_ticks = 300);

}  // namespace colanet
