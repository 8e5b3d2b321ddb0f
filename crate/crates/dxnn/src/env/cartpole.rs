//! Two-pole cart physics with fourth-order Runge-Kutta integration.
//!
//! The model follows the standard double pole balancing benchmark: a cart on
//! a finite track with two unequal poles hinged to it, cart and hinge
//! friction included. Angles are measured from the upright vertical, so the
//! equilibrium at zero is unstable.

/// Cart mass, kg.
pub const CART_MASS: f64 = 1.0;
/// Pole masses, kg.
pub const POLE_MASS: [f64; 2] = [0.1, 0.01];
/// Pole half-lengths, m (full lengths 1.0 m and 0.1 m).
pub const POLE_HALF_LENGTH: [f64; 2] = [0.5, 0.05];
/// Gravitational acceleration, m/s^2.
pub const GRAVITY: f64 = 9.81;
/// Cart-track friction coefficient.
pub const CART_FRICTION: f64 = 0.0005;
/// Pole-hinge friction coefficient.
pub const POLE_FRICTION: f64 = 0.000002;

/// Full state of the cart and both poles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartPoleState {
    /// Cart position, m (track center at 0).
    pub x: f64,
    /// Cart velocity, m/s.
    pub x_dot: f64,
    /// Pole angles from vertical, rad.
    pub theta: [f64; 2],
    /// Pole angular velocities, rad/s.
    pub theta_dot: [f64; 2],
    /// Control steps taken so far.
    pub steps: u64,
}

impl CartPoleState {
    /// The benchmark's standard initial state: cart centered at rest, long
    /// pole at 4 degrees, short pole vertical.
    pub fn initial() -> Self {
        CartPoleState {
            x: 0.0,
            x_dot: 0.0,
            theta: [4.0f64.to_radians(), 0.0],
            theta_dot: [0.0, 0.0],
            steps: 0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite()
            && self.x_dot.is_finite()
            && self.theta.iter().all(|t| t.is_finite())
            && self.theta_dot.iter().all(|t| t.is_finite())
    }
}

/// Time derivative of the continuous state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivatives {
    pub x_dot: f64,
    pub x_ddot: f64,
    pub theta_dot: [f64; 2],
    pub theta_ddot: [f64; 2],
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Equations of motion for the cart and both poles under the applied force.
///
/// Each pole contributes an effective force and effective mass to the cart:
///
/// ```text
/// F~_i = m_i l_i th'_i^2 sin th_i + (3/4) m_i cos th_i (mu_p th'_i / (m_i l_i) - g sin th_i)
/// m~_i = m_i (1 - (3/4) cos^2 th_i)
/// x''  = (F - mu_c sgn(x') + sum F~_i) / (M + sum m~_i)
/// th''_i = (3 / (4 l_i)) (g sin th_i - x'' cos th_i - mu_p th'_i / (m_i l_i))
/// ```
///
/// Signs are arranged so a displaced pole falls away from vertical.
pub fn cartpole_derivatives(s: &CartPoleState, force: f64) -> Derivatives {
    let mut eff_force_sum = 0.0;
    let mut eff_mass_sum = 0.0;
    for i in 0..2 {
        let (m, l) = (POLE_MASS[i], POLE_HALF_LENGTH[i]);
        let (sin_t, cos_t) = s.theta[i].sin_cos();
        let td = s.theta_dot[i];
        eff_force_sum += m * l * td * td * sin_t
            + 0.75 * m * cos_t * (POLE_FRICTION * td / (m * l) - GRAVITY * sin_t);
        eff_mass_sum += m * (1.0 - 0.75 * cos_t * cos_t);
    }
    let x_ddot =
        (force - CART_FRICTION * sign(s.x_dot) + eff_force_sum) / (CART_MASS + eff_mass_sum);
    let mut theta_ddot = [0.0; 2];
    for i in 0..2 {
        let (m, l) = (POLE_MASS[i], POLE_HALF_LENGTH[i]);
        let (sin_t, cos_t) = s.theta[i].sin_cos();
        theta_ddot[i] = 0.75 / l
            * (GRAVITY * sin_t - x_ddot * cos_t - POLE_FRICTION * s.theta_dot[i] / (m * l));
    }
    Derivatives { x_dot: s.x_dot, x_ddot, theta_dot: s.theta_dot, theta_ddot }
}

fn advanced(s: &CartPoleState, d: &Derivatives, h: f64) -> CartPoleState {
    CartPoleState {
        x: s.x + h * d.x_dot,
        x_dot: s.x_dot + h * d.x_ddot,
        theta: [s.theta[0] + h * d.theta_dot[0], s.theta[1] + h * d.theta_dot[1]],
        theta_dot: [s.theta_dot[0] + h * d.theta_ddot[0], s.theta_dot[1] + h * d.theta_ddot[1]],
        steps: s.steps,
    }
}

/// One classical fourth-order Runge-Kutta step with the force held constant.
pub fn rk4_step(s: &CartPoleState, force: f64, h: f64) -> CartPoleState {
    let k1 = cartpole_derivatives(s, force);
    let k2 = cartpole_derivatives(&advanced(s, &k1, h / 2.0), force);
    let k3 = cartpole_derivatives(&advanced(s, &k2, h / 2.0), force);
    let k4 = cartpole_derivatives(&advanced(s, &k3, h), force);
    let combine = |a: f64, b: f64, c: f64, d: f64| (a + 2.0 * b + 2.0 * c + d) / 6.0;
    CartPoleState {
        x: s.x + h * combine(k1.x_dot, k2.x_dot, k3.x_dot, k4.x_dot),
        x_dot: s.x_dot + h * combine(k1.x_ddot, k2.x_ddot, k3.x_ddot, k4.x_ddot),
        theta: [
            s.theta[0]
                + h * combine(k1.theta_dot[0], k2.theta_dot[0], k3.theta_dot[0], k4.theta_dot[0]),
            s.theta[1]
                + h * combine(k1.theta_dot[1], k2.theta_dot[1], k3.theta_dot[1], k4.theta_dot[1]),
        ],
        theta_dot: [
            s.theta_dot[0]
                + h * combine(
                    k1.theta_ddot[0],
                    k2.theta_ddot[0],
                    k3.theta_ddot[0],
                    k4.theta_ddot[0],
                ),
            s.theta_dot[1]
                + h * combine(
                    k1.theta_ddot[1],
                    k2.theta_ddot[1],
                    k3.theta_ddot[1],
                    k4.theta_ddot[1],
                ),
        ],
        steps: s.steps,
    }
}

/// Total mechanical energy of the system (kinetic plus potential), used to
/// gauge integrator drift. Friction dissipates energy physically, so this is
/// only conserved approximately over short horizons.
pub fn system_energy(s: &CartPoleState) -> f64 {
    let mut e = 0.5 * CART_MASS * s.x_dot * s.x_dot;
    for i in 0..2 {
        let (m, l) = (POLE_MASS[i], POLE_HALF_LENGTH[i]);
        let (sin_t, cos_t) = s.theta[i].sin_cos();
        let td = s.theta_dot[i];
        let vx = s.x_dot + l * td * cos_t;
        let vy = -l * td * sin_t;
        let inertia = m * l * l / 3.0;
        e += 0.5 * m * (vx * vx + vy * vy) + 0.5 * inertia * td * td;
        e += m * GRAVITY * l * cos_t;
    }
    e
}
