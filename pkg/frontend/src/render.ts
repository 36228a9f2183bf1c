/** Pure HTML renderers. Prediction (pass/fail) and trustworthiness (group)
 * use separate visual channels: the group badge never reuses the pass/fail
 * color, and unknown-unknown risk gets its own alert badge. */

import type { TriageRow } from "./api.ts";
import { ViewState, badgeCount, groupCounts, isMarked, rosterSize, visibleRows } from "./state.ts";

export const GROUP_LABELS: Record<number, string> = {
  0: "known known",
  1: "known unknown",
  2: "unknown unknown",
};

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderCounters(state: ViewState): string {
  const counts = groupCounts(state);
  const total = rosterSize(state);
  const parts = [0, 1, 2].map((g) => {
    const n = counts[String(g)] ?? 0;
    return (
      `<span class="counter counter-${g}" data-group="${g}" data-count="${n}">` +
      `${GROUP_LABELS[g]}: ${n}</span>`
    );
  });
  parts.push(
    `<span class="counter counter-total" data-count="${total}">students: ${total}</span>`,
  );
  parts.push(
    `<span class="counter counter-delta" data-delta="${state.delta}">trust level: ${state.delta.toFixed(2)}</span>`,
  );
  return `<div class="counters">${parts.join("")}</div>`;
}

export function renderExplanation(row: TriageRow): string {
  if (row.explanation.length === 0) {
    return '<p class="explanation-empty">no characterization available</p>';
  }
  const items = row.explanation
    .map(
      (e) =>
        `<li data-id="${esc(e.id)}" data-gamma="${e.gamma}">` +
        `${esc(e.id)}: weight ${e.gamma.toFixed(2)}, student value ${e.value.toFixed(2)}</li>`,
    )
    .join("");
  return `<ul class="explanation">${items}</ul>`;
}

export function renderRow(state: ViewState, row: TriageRow): string {
  const marked = isMarked(state, row.user_id);
  const alert = row.uu_risk
    ? '<span class="badge uu-alert" title="at risk of being an unknown unknown">&#9888; check</span>'
    : "";
  const expanded = state.selected === row.user_id;
  const prediction = row.y_hat === 1 ? "fail" : "pass";
  return (
    `<tr class="row group-${row.group}${row.uu_risk ? " risky" : ""}" data-user="${esc(row.user_id)}">` +
    `<td class="cell-user">${esc(row.user_id)}</td>` +
    `<td class="cell-pred pred-${prediction}">${prediction}</td>` +
    `<td class="cell-p">${row.p.toFixed(3)}</td>` +
    `<td class="cell-c">${row.c.toFixed(3)}</td>` +
    `<td class="cell-group"><span class="group-badge group-badge-${row.group}">${GROUP_LABELS[row.group]}</span></td>` +
    `<td class="cell-alert">${alert}</td>` +
    `<td class="cell-mark"><button class="mark-btn${marked ? " marked" : ""}" data-user="${esc(row.user_id)}">` +
    `${marked ? "marked for help" : "mark for help"}</button></td>` +
    `</tr>` +
    (expanded
      ? `<tr class="detail" data-user="${esc(row.user_id)}"><td colspan="7">${renderExplanation(row)}</td></tr>`
      : "")
  );
}

export function renderRoster(state: ViewState): string {
  if (state.roster === null) {
    return '<p class="empty-state">loading roster&hellip;</p>';
  }
  const rows = visibleRows(state);
  if (rows.length === 0) {
    return '<p class="empty-state">no students to show</p>';
  }
  const header =
    "<tr><th>student</th><th>prediction</th><th>p(fail)</th><th>confidence</th>" +
    "<th>group</th><th>alert</th><th>intervention</th></tr>";
  return (
    `<table class="roster" data-badges="${badgeCount(state)}">` +
    `<thead>${header}</thead><tbody>` +
    rows.map((r) => renderRow(state, r)).join("") +
    "</tbody></table>"
  );
}

export function renderBanner(state: ViewState): string {
  if (!state.error) return "";
  return (
    `<div class="banner error" role="alert">${esc(state.error)} ` +
    '<button class="retry-btn">retry</button></div>'
  );
}

export function renderApp(state: ViewState): string {
  return renderBanner(state) + renderCounters(state) + renderRoster(state);
}
