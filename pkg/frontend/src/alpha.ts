// Exploration knob: the alpha slider is log-scaled over [0.5, 100] so the
// interesting low-alpha (aggressive exploration) region gets real travel.

export const ALPHA_MIN = 0.5;
export const ALPHA_MAX = 100;

export function sliderToAlpha(position: number): number {
  const t = Math.min(1, Math.max(0, position));
  const value = ALPHA_MIN * Math.pow(ALPHA_MAX / ALPHA_MIN, t);
  return Number(value.toPrecision(3));
}

export function alphaToSlider(alpha: number): number {
  const clamped = Math.min(ALPHA_MAX, Math.max(ALPHA_MIN, alpha));
  return Math.log(clamped / ALPHA_MIN) / Math.log(ALPHA_MAX / ALPHA_MIN);
}
