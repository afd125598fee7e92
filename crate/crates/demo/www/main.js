import init, { Demo } from "./pkg/gazelink_demo.js";

const canvas = document.getElementById("stage");
const ctx = canvas.getContext("2d");
const status = document.getElementById("status");
const modeSel = document.getElementById("mode");
const membersInput = document.getElementById("members");

let demo;
let reading = null;
let armed = "";
let last = performance.now();

function reset() {
  demo?.free();
  demo = new Demo(Number(membersInput.value), canvas.width, canvas.height, modeSel.value);
  armed = "";
}

function pos(ev) {
  const r = canvas.getBoundingClientRect();
  return [ev.clientX - r.left, ev.clientY - r.top];
}

canvas.addEventListener("mousemove", (ev) => {
  const [x, y] = pos(ev);
  reading = JSON.parse(demo.pointer(performance.now(), x, y));
});

canvas.addEventListener("click", (ev) => {
  const [x, y] = pos(ev);
  armed = demo.click(x, y);
  status.textContent = armed ? `${armed} selected: click its target` : "Click a peer, then click where it should look.";
});

modeSel.addEventListener("change", () => demo.set_mode(modeSel.value));
membersInput.addEventListener("change", reset);

function drawTile(tile, pose, frame) {
  const yaw = pose ? pose.yaw : 0;
  const shake = pose ? pose.shake : 0;
  const squeeze = Math.cos((yaw * Math.PI) / 180);
  const cx = tile.x + tile.w / 2 + shake;
  ctx.save();
  ctx.translate(cx, tile.y + tile.h / 2);
  ctx.transform(squeeze, Math.sin((yaw * Math.PI) / 180) * 0.25, 0, 1, 0, 0);
  const own = tile.owner === frame.viewer;
  ctx.fillStyle = own ? "#2a3340" : "#262a31";
  ctx.fillRect(-tile.w / 2, -tile.h / 2, tile.w, tile.h);
  ctx.strokeStyle = tile.owner === armed ? "#f5c542" : "#3c424c";
  ctx.lineWidth = 2;
  ctx.strokeRect(-tile.w / 2, -tile.h / 2, tile.w, tile.h);
  ctx.setLineDash([4, 4]);
  ctx.strokeStyle = "#333a44";
  ctx.strokeRect(-tile.w / 4, -tile.h / 4, tile.w / 2, tile.h / 2);
  ctx.setLineDash([]);
  ctx.fillStyle = "#ccd";
  ctx.font = "16px system-ui";
  ctx.fillText(own ? `${tile.owner} (you)` : tile.owner, -tile.w / 2 + 10, -tile.h / 2 + 22);
  ctx.restore();
}

function drawArrow(a) {
  const { from, to } = a;
  const ang = Math.atan2(to.y - from.y, to.x - from.x);
  ctx.strokeStyle = ctx.fillStyle = `rgba(80, 200, 255, ${a.opacity})`;
  ctx.lineWidth = 4;
  ctx.beginPath();
  ctx.moveTo(from.x, from.y);
  ctx.lineTo(to.x, to.y);
  ctx.stroke();
  ctx.beginPath();
  ctx.moveTo(to.x, to.y);
  ctx.lineTo(to.x - 16 * Math.cos(ang - 0.4), to.y - 16 * Math.sin(ang - 0.4));
  ctx.lineTo(to.x - 16 * Math.cos(ang + 0.4), to.y - 16 * Math.sin(ang + 0.4));
  ctx.fill();
}

function render(frame) {
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const tiles = frame.tile_geometry.tiles;
  const byOwner = Object.fromEntries(tiles.map((t) => [t.owner, t]));
  for (const g of frame.glows) {
    const t = byOwner[g.tile];
    ctx.save();
    ctx.shadowColor = `rgba(255, 210, 90, ${g.intensity})`;
    ctx.shadowBlur = 30;
    ctx.fillStyle = `rgba(255, 210, 90, ${0.6 * g.intensity})`;
    ctx.fillRect(t.x - 6, t.y - 6, t.w + 12, t.h + 12);
    ctx.restore();
  }
  const poses = Object.fromEntries(frame.poses.map((p) => [p.tile, p]));
  for (const t of tiles) drawTile(t, poses[t.owner], frame);
  for (const a of frame.arrows) drawArrow(a);
  if (reading) {
    ctx.fillStyle = "rgba(255,255,255,0.35)";
    ctx.beginPath();
    ctx.arc(reading.raw.x, reading.raw.y, 4, 0, 2 * Math.PI);
    ctx.fill();
    ctx.strokeStyle = reading.reported ? "#7f7" : "#f77";
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.arc(reading.smoothed.x, reading.smoothed.y, 10, 0, 2 * Math.PI);
    ctx.stroke();
    ctx.fillStyle = "#ccd";
    ctx.fillText(`looking at: ${reading.reported ?? "nobody"}`, 12, canvas.height - 12);
  }
}

function loop(now) {
  const frame = JSON.parse(demo.step(now - last));
  last = now;
  render(frame);
  requestAnimationFrame(loop);
}

await init();
reset();
requestAnimationFrame(loop);
