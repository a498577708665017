/**
 * Console entry point. Configuration is one value: the central base URL,
 * taken from the ?central= query parameter (default http://127.0.0.1:8420).
 */

import { CentralClient } from './api.js';
import { ConsoleController } from './controller.js';
import { Poller } from './poller.js';
import { renderBanner, renderDashboard, renderDetail, renderQueue } from './render.js';
import type { AlarmDetail, Decision } from './types.js';

const params = new URLSearchParams(window.location.search);
const centralUrl = params.get('central') ?? 'http://127.0.0.1:8420';

const controller = new ConsoleController(new CentralClient(centralUrl));

const bannerEl = document.getElementById('banner') as HTMLElement;
const queueEl = document.getElementById('queue') as HTMLElement;
const detailEl = document.getElementById('detail') as HTMLElement;
const dashboardEl = document.getElementById('dashboard') as HTMLElement;
const noticesEl = document.getElementById('notices') as HTMLElement;

let openDetail: AlarmDetail | null = null;

function paint(): void {
  renderQueue(queueEl, controller.queue);
  renderDetail(detailEl, openDetail);
  renderDashboard(dashboardEl, controller.dashboard);
  renderBanner(bannerEl, queuePoller.banner.down ? queuePoller.banner : dashPoller.banner);
  for (const notice of controller.queue.drainNotices()) {
    const p = document.createElement('p');
    p.className = `notice ${notice.kind}`;
    p.textContent = notice.message;
    noticesEl.prepend(p);
    setTimeout(() => p.remove(), 8000);
  }
}

const queuePoller = new Poller(() => controller.refreshQueue(), paint);
const dashPoller = new Poller(() => controller.refreshDashboard(), paint);

queueEl.addEventListener('click', (event) => {
  const target = event.target as HTMLElement;
  const decideId = target.getAttribute('data-alarm');
  const decision = target.getAttribute('data-decide') as Decision | null;
  if (decideId && decision) {
    paint(); // repaint immediately with the button disabled
    void controller.decide(decideId, decision).then(paint, paint);
    return;
  }
  const detailId = target.getAttribute('data-detail');
  if (detailId) {
    event.preventDefault();
    void controller.openDetail(detailId).then((detail) => {
      openDetail = detail;
      paint();
    });
  }
});

dashboardEl.addEventListener('click', (event) => {
  const target = event.target as HTMLElement;
  if (target.id === 'retrain') {
    void controller.retrain().then((started) => {
      if (started) void dashPoller.tick();
      paint();
    });
  }
});

queuePoller.start(2000);
dashPoller.start(3000);
