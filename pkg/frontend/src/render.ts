/**
 * DOM rendering. Pure presentation: reads store state, writes innerHTML.
 */

import { DashboardStore } from './dashboard.js';
import { FEATURE_GROUPS } from './featureGroups.js';
import { AlarmQueueStore } from './queue.js';
import type { BannerState } from './poller.js';
import type { AlarmDetail } from './types.js';

function esc(value: unknown): string {
  return String(value)
    .replaceAll('&', '&amp;')
    .replaceAll('<', '&lt;')
    .replaceAll('>', '&gt;')
    .replaceAll('"', '&quot;');
}

const STATUS_LABEL: Record<string, string> = {
  pending: 'pending',
  confirmed_attack: 'confirmed attack',
  false_alarm: 'false alarm',
};

export function renderBanner(element: HTMLElement, banner: BannerState): void {
  if (!banner.down) {
    element.hidden = true;
    element.textContent = '';
    return;
  }
  element.hidden = false;
  element.textContent = `${banner.message} (attempt ${banner.failures})`;
}

export function renderQueue(element: HTMLElement, queue: AlarmQueueStore): void {
  if (queue.isEmpty) {
    element.innerHTML = '<p class="empty">No alarms.</p>';
    return;
  }
  const rows = queue
    .list()
    .map((row) => {
      const stale = queue.isStale(row.alarm_id) ? ' stale' : '';
      const busy = queue.isInFlight(row.alarm_id);
      const actions =
        row.status === 'pending'
          ? `<button data-decide="confirmed_attack" data-alarm="${esc(row.alarm_id)}" ${busy ? 'disabled' : ''}>attack</button>
             <button data-decide="false_alarm" data-alarm="${esc(row.alarm_id)}" ${busy ? 'disabled' : ''}>false alarm</button>`
          : '';
      return `<tr class="status-${esc(row.status)}${stale}" data-row="${esc(row.alarm_id)}">
        <td><a href="#" data-detail="${esc(row.alarm_id)}">${esc(row.alarm_id)}</a></td>
        <td>${esc(row.source)}</td>
        <td>${esc(row.node_id)}</td>
        <td>${row.timestamp.toFixed(0)}</td>
        <td>${row.score.toFixed(3)}</td>
        <td>v${row.model_version_used}</td>
        <td><span class="chip ${esc(row.status)}">${esc(STATUS_LABEL[row.status] ?? row.status)}</span></td>
        <td>${actions}</td>
      </tr>`;
    })
    .join('');
  element.innerHTML = `<table>
    <thead><tr><th>alarm</th><th>source</th><th>node</th><th>time</th>
    <th>score</th><th>model</th><th>status</th><th>verdict</th></tr></thead>
    <tbody>${rows}</tbody></table>
    <p>${queue.pendingCount()} pending · evidence collected: ${queue.evidenceCount}</p>`;
}

export function renderDetail(element: HTMLElement, detail: AlarmDetail | null): void {
  if (detail === null) {
    element.innerHTML = '<p class="empty">Select an alarm to inspect its record.</p>';
    return;
  }
  const groups = Object.entries(FEATURE_GROUPS)
    .map(([group, names]) => {
      const rows = names
        .map((name) => {
          const value = detail.record[name];
          const slot = detail.encoded[name];
          const note = slot
            ? slot.in_vocabulary
              ? ' <em>(known symbol)</em>'
              : ' <em>(unknown to the model)</em>'
            : '';
          return `<tr><td>${esc(name)}</td><td>${esc(value)}${note}</td></tr>`;
        })
        .join('');
      return `<h4>${esc(group.replaceAll('_', ' '))}</h4><table>${rows}</table>`;
    })
    .join('');
  const label = detail.record.label;
  const truth =
    label.kind === 'attack' ? `${label.name} (${label.category})` : 'normal';
  element.innerHTML = `<h3>${esc(detail.alarm_id)}</h3>
    <p>score ${detail.score.toFixed(4)} under model v${detail.model_version_used};
    observed label: ${esc(truth)}</p>${groups}`;
}

export function renderDashboard(element: HTMLElement, dashboard: DashboardStore): void {
  const version = dashboard.modelVersion;
  const badge = version === null ? 'no model' : `model v${version}`;
  const nodes = dashboard
    .nodeBadges()
    .map(
      (node) => `<li class="${node.converged ? 'converged' : 'lagging'}">
        ${esc(node.node_id)} (${esc(node.source)}): v${node.applied_version}
        ${node.converged ? '✓' : '⟳ catching up'}</li>`,
    )
    .join('');
  const convergence = dashboard.allConverged
    ? 'all monitors converged'
    : 'waiting for monitors to converge';
  const retrainState = dashboard.retrainRunning ? 'disabled' : '';
  const zero = dashboard.isZeroState
    ? '<p class="empty">No alarm traffic measured yet.</p>'
    : '';
  element.innerHTML = `<h3><span class="chip version">${esc(badge)}</span>
      ${dashboard.retrainRunning ? '<span class="chip busy">retraining…</span>' : ''}</h3>
    ${zero}
    <p>known-attack detection: ${esc(dashboard.detectionRateText())}
       · false alarms: ${esc(dashboard.falseAlarmText())}</p>
    <button id="retrain" ${retrainState}>retrain now</button>
    <h4>monitors (${convergence})</h4><ul>${nodes || '<li>none registered</li>'}</ul>`;
}
