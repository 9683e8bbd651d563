/**
 * Browser entry: connect to the session service, render the structure,
 * and wire the branch list / timeline / undo controls.
 */

import * as THREE from "three";
import { SessionClient, Transport } from "./protocol.js";
import { ExplorerViewModel } from "./viewmodel.js";
import { StructureView } from "./render.js";

const WS_URL = (window as any).METAMORPH_WS ?? "ws://127.0.0.1:8750/ws";

function el<T extends HTMLElement>(id: string): T {
  return document.getElementById(id) as T;
}

async function boot() {
  const scene = new THREE.Scene();
  scene.background = new THREE.Color(0x10141c);
  const camera = new THREE.PerspectiveCamera(
    45, window.innerWidth / window.innerHeight, 0.1, 500);
  camera.position.set(18, -22, 16);
  camera.up.set(0, 0, 1);
  camera.lookAt(0, 0, 2);
  const renderer = new THREE.WebGLRenderer({ antialias: true });
  renderer.setSize(window.innerWidth, window.innerHeight);
  el("scene").appendChild(renderer.domElement);
  scene.add(new THREE.AmbientLight(0xffffff, 0.7));
  const sun = new THREE.DirectionalLight(0xffffff, 1.2);
  sun.position.set(10, -14, 24);
  scene.add(sun);
  scene.add(new THREE.GridHelper(32, 16, 0x3c4454, 0x262c38)
    .rotateX(Math.PI / 2));

  const notice = (msg: string) => {
    const box = el<HTMLDivElement>("notice");
    box.textContent = msg;
    box.style.opacity = "1";
    setTimeout(() => (box.style.opacity = "0"), 4000);
  };

  const view = new StructureView(scene, notice);
  const socket = new WebSocket(WS_URL) as unknown as Transport;
  await new Promise<void>((resolve, reject) => {
    (socket as any).onopen = () => resolve();
    (socket as any).onerror = () => reject(new Error(`cannot reach ${WS_URL}`));
  });
  const client = new SessionClient(socket);
  const vm = new ExplorerViewModel(client, {
    onRender: (snapshot) => {
      view.renderState(snapshot);
      el("cubes").textContent = `${snapshot.centers.length} cubes`;
    },
    onBranches: (branches) => {
      const list = el<HTMLUListElement>("branches");
      list.innerHTML = "";
      for (const b of branches) {
        const li = document.createElement("li");
        const dof = `${b.path_dof} DOF`;
        li.innerHTML = `<button data-id="${b.branch_id}">${b.branch_id}</button>
          <span class="badge">${dof}</span>
          <span class="joints">${b.changed_hinges.length} joints</span>`;
        li.querySelector("button")!.addEventListener("click", async () => {
          try {
            await vm.selectBranch(b.branch_id);
          } catch {
            /* notice already shown */
          }
        });
        list.appendChild(li);
      }
    },
    onNotice: notice,
  });

  await vm.connect();
  await vm.loadDesign("canonical");

  el<HTMLButtonElement>("undo").addEventListener("click", async () => {
    try {
      await vm.undo();
    } catch (err) {
      notice(String(err));
    }
  });
  const slider = el<HTMLInputElement>("timeline");
  slider.addEventListener("input", () => {
    vm.scrubTimeline(Number(slider.value) / 1000);
  });

  function animate() {
    requestAnimationFrame(animate);
    renderer.render(scene, camera);
  }
  animate();
}

boot().catch((err) => {
  document.body.innerHTML = `<pre class="fatal">${err}</pre>`;
});
