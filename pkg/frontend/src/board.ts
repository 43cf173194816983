// Canvas rendering: walked path, relays, current position, and the
// placement region shaded relative to the last relay. The region is the
// decision-relevant picture, so it re-anchors on every placement.

import type { BoardView } from "./state.js";

const COLORS = {
  grid: "#dfe6ee",
  region: "rgba(255, 138, 101, 0.35)",
  regionEdge: "#e64a19",
  path: "#1565c0",
  relay: "#2e7d32",
  person: "#311b92",
  source: "#212121",
};

function mStarAt(rows: Array<[number, number]>, n: number): number {
  const nMax = rows.length - 1;
  return n >= rows.length ? 0 : rows[Math.max(n, 0)][1] ?? rows[nMax][1];
}

export function renderBoard(canvas: HTMLCanvasElement, view: BoardView): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const width = canvas.width;
  const height = canvas.height;
  ctx.clearRect(0, 0, width, height);

  const rows = view.boundary.rows;
  const anchor = view.relayMarkers.length
    ? view.relayMarkers[view.relayMarkers.length - 1]
    : ([0, 0] as [number, number]);
  const regionReach = rows.length ? rows[0][1] + rows.length : 8;

  // viewport: everything walked plus the shaded frontier, auto-zoomed
  let maxX = 4;
  let maxY = 4;
  for (const [x, y] of view.path) {
    maxX = Math.max(maxX, x);
    maxY = Math.max(maxY, y);
  }
  maxX = Math.max(maxX, anchor[0] + regionReach);
  maxY = Math.max(maxY, anchor[1] + rows.length + 2);
  const margin = 24;
  const scale = Math.min((width - 2 * margin) / (maxX + 1), (height - 2 * margin) / (maxY + 1));
  const px = (x: number) => margin + x * scale;
  const py = (y: number) => height - margin - y * scale;

  // lattice
  ctx.strokeStyle = COLORS.grid;
  ctx.lineWidth = 1;
  const stride = Math.max(1, Math.round(24 / scale));
  for (let x = 0; x <= maxX + 1; x += stride) {
    ctx.beginPath();
    ctx.moveTo(px(x), py(0));
    ctx.lineTo(px(x), py(maxY + 1));
    ctx.stroke();
  }
  for (let y = 0; y <= maxY + 1; y += stride) {
    ctx.beginPath();
    ctx.moveTo(px(0), py(y));
    ctx.lineTo(px(maxX + 1), py(y));
    ctx.stroke();
  }

  // placement region, translated to the last relay
  ctx.fillStyle = COLORS.region;
  const regionTop = Math.min(maxY + 1, anchor[1] + rows.length + regionReach);
  for (let n = 0; anchor[1] + n <= regionTop; n += 1) {
    const mStart = mStarAt(rows, n);
    const x0 = anchor[0] + mStart;
    if (x0 > maxX + 1) continue;
    ctx.fillRect(px(x0) - scale / 2, py(anchor[1] + n) - scale / 2, px(maxX + 1) - px(x0) + scale, scale);
  }
  ctx.strokeStyle = COLORS.regionEdge;
  ctx.lineWidth = 2;
  ctx.beginPath();
  for (let n = 0; n < rows.length; n += 1) {
    const x = px(anchor[0] + rows[n][1]) - scale / 2;
    const yTop = py(anchor[1] + n) - scale / 2;
    const yBot = py(anchor[1] + n) + scale / 2;
    if (n === 0) ctx.moveTo(x, py(anchor[1]) + scale / 2);
    ctx.lineTo(x, yTop);
    ctx.lineTo(px(anchor[0] + mStarAt(rows, n + 1)) - scale / 2, yTop);
    void yBot;
  }
  ctx.stroke();

  // walked path
  ctx.strokeStyle = COLORS.path;
  ctx.lineWidth = 3;
  ctx.beginPath();
  view.path.forEach(([x, y], i) => {
    if (i === 0) ctx.moveTo(px(x), py(y));
    else ctx.lineTo(px(x), py(y));
  });
  ctx.stroke();

  // control centre
  ctx.fillStyle = COLORS.source;
  ctx.fillRect(px(0) - 5, py(0) - 5, 10, 10);

  // relays
  ctx.fillStyle = COLORS.relay;
  for (const [x, y] of view.relayMarkers) {
    ctx.beginPath();
    ctx.arc(px(x), py(y), 6, 0, 2 * Math.PI);
    ctx.fill();
  }

  // current position (or the source, once the corridor ended)
  const [cx, cy] = view.absPosition;
  if (view.ended) {
    ctx.fillStyle = COLORS.source;
    ctx.fillRect(px(cx) - 6, py(cy) - 6, 12, 12);
  } else {
    ctx.fillStyle = COLORS.person;
    ctx.beginPath();
    ctx.moveTo(px(cx), py(cy) - 9);
    ctx.lineTo(px(cx) - 7, py(cy) + 7);
    ctx.lineTo(px(cx) + 7, py(cy) + 7);
    ctx.closePath();
    ctx.fill();
  }
}
