// Six-step color ramps. The server assigns bin indices (inversion included),
// so a palette is just index -> fill.

export const DIVERGING: readonly string[] = [
  "#2166ac",
  "#67a9cf",
  "#d1e5f0",
  "#fddbc7",
  "#ef8a62",
  "#b2182b",
];

export const SINGLE_HUE: readonly string[] = [
  "#eff3ff",
  "#c6dbef",
  "#9ecae1",
  "#6baed6",
  "#3182bd",
  "#08519c",
];

export function paletteFor(colorMap: string): readonly string[] {
  return colorMap === "single-hue" ? SINGLE_HUE : DIVERGING;
}

export function fillFor(colorMap: string, index: number): string {
  const palette = paletteFor(colorMap);
  const clamped = Math.max(0, Math.min(palette.length - 1, Math.round(index)));
  return palette[clamped];
}
