/**
 * What-if view: sweep one preference weight across a grid and chart how the
 * top-3 scores and the winner identity respond. The chart is plain SVG.
 */

import type { Session } from "../state";
import { ApiError } from "../api";
import { whatifSeries } from "../viewmodels";
import type { WhatIfSeries } from "../viewmodels";

const SVG_NS = "http://www.w3.org/2000/svg";
const PALETTE = ["#2563eb", "#d97706", "#059669", "#db2777", "#7c3aed"];
const WIDTH = 560;
const HEIGHT = 280;
const PAD = 36;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function svgEl(tag: string, attrs: Record<string, string>): SVGElement {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  return node;
}

function chart(series: WhatIfSeries): SVGElement {
  const svg = svgEl("svg", {
    viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
    class: "whatif-chart",
    role: "img",
  });
  const weights = series.points.map((p) => p.weight);
  const lo = Math.min(...weights);
  const hi = Math.max(...weights);
  const x = (w: number) =>
    PAD + (hi === lo ? 0.5 : (w - lo) / (hi - lo)) * (WIDTH - 2 * PAD);
  const y = (score: number) => HEIGHT - PAD - score * (HEIGHT - 2 * PAD);

  // frame and score gridlines (scores live in [0, 1])
  for (const tick of [0, 0.25, 0.5, 0.75, 1]) {
    svg.appendChild(
      svgEl("line", {
        x1: String(PAD),
        x2: String(WIDTH - PAD),
        y1: String(y(tick)),
        y2: String(y(tick)),
        class: "chart-grid",
      }),
    );
    const label = svgEl("text", {
      x: String(PAD - 6),
      y: String(y(tick) + 4),
      "text-anchor": "end",
      class: "chart-label",
    });
    label.textContent = tick.toFixed(2);
    svg.appendChild(label);
  }
  for (const w of weights) {
    const label = svgEl("text", {
      x: String(x(w)),
      y: String(HEIGHT - PAD + 16),
      "text-anchor": "middle",
      class: "chart-label",
    });
    label.textContent = String(w);
    svg.appendChild(label);
  }

  // one line per profile that ever reaches the top 3
  series.profiles.forEach((profile, index) => {
    const coords = series.points
      .filter((p) => profile in p.scores)
      .map((p) => `${x(p.weight)},${y(p.scores[profile]!)}`);
    if (coords.length > 1) {
      svg.appendChild(
        svgEl("polyline", {
          points: coords.join(" "),
          fill: "none",
          stroke: PALETTE[index % PALETTE.length]!,
          "stroke-width": "2",
        }),
      );
    }
    for (const p of series.points) {
      const score = p.scores[profile];
      if (score === undefined) continue;
      svg.appendChild(
        svgEl("circle", {
          cx: String(x(p.weight)),
          cy: String(y(score)),
          r: p.leader === profile ? "5" : "3",
          fill: PALETTE[index % PALETTE.length]!,
          class: p.leader === profile ? "chart-leader" : "",
        }),
      );
    }
  });

  return svg;
}

export function renderWhatIfView(container: HTMLElement, session: Session): void {
  container.replaceChildren();
  const kb = session.knowledgeBase();

  const controls = el("div", "whatif-controls");
  const criterionSelect = el("select") as HTMLSelectElement;
  const refreshOptions = () => {
    const positive = Object.keys(session.snapshot().draft.weights);
    criterionSelect.replaceChildren();
    for (const cid of positive) {
      const name = kb.criteria.find((c) => c.id === cid)?.name ?? cid;
      criterionSelect.appendChild(new Option(name, cid));
    }
    criterionSelect.disabled = positive.length === 0;
  };
  refreshOptions();
  session.subscribe((event) => {
    if (event === "draft") refreshOptions();
  });

  const gridInput = el("input") as HTMLInputElement;
  gridInput.type = "text";
  gridInput.value = "0, 0.25, 0.5, 0.75, 1";
  gridInput.title = "weights to sweep, comma separated";

  const run = el("button", undefined, "sweep");
  const message = el("div", "file-message");
  const plot = el("div", "whatif-plot");
  const legend = el("div", "whatif-legend");

  run.addEventListener("click", async () => {
    const criterion = criterionSelect.value;
    const grid = gridInput.value
      .split(",")
      .map((s) => Number(s.trim()))
      .filter((n) => Number.isFinite(n));
    if (!criterion || grid.length === 0) {
      message.textContent = "pick a weighted criterion and a numeric grid";
      return;
    }
    message.textContent = "sweeping...";
    try {
      const result = await session.whatIf(criterion, grid);
      const series = whatifSeries(result);
      plot.replaceChildren(chart(series));
      legend.replaceChildren();
      series.profiles.forEach((profile, index) => {
        const name = kb.profiles.find((p) => p.id === profile)?.name ?? profile;
        const entry = el("span", "legend-entry", name);
        entry.style.borderColor = PALETTE[index % PALETTE.length]!;
        legend.appendChild(entry);
      });
      const leaders = series.points
        .map((p) => `${p.weight}: ${p.leader ?? "none"}`)
        .join("   ");
      message.textContent = `winner by weight: ${leaders}`;
    } catch (err) {
      message.textContent =
        err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
    }
  });

  controls.appendChild(criterionSelect);
  controls.appendChild(gridInput);
  controls.appendChild(run);
  container.appendChild(controls);
  container.appendChild(message);
  container.appendChild(plot);
  container.appendChild(legend);
}
