// Usage: node validate.js FILE.glb|FILE.gltf
// Prints the validator summary and exits non-zero on any error.
const fs = require("fs");
const path = require("path");
const validator = require("gltf-validator");

const file = process.argv[2];
if (!file) {
  console.error("usage: node validate.js FILE");
  process.exit(2);
}
const bytes = new Uint8Array(fs.readFileSync(file));
validator
  .validateBytes(bytes, {
    uri: path.basename(file),
    externalResourceFunction: (uri) =>
      new Promise((resolve, reject) => {
        fs.readFile(path.join(path.dirname(file), decodeURIComponent(uri)), (err, data) =>
          err ? reject(err.toString()) : resolve(new Uint8Array(data)));
      }),
  })
  .then((report) => {
    const { numErrors, numWarnings, numInfos } = report.issues;
    console.log(`${file}: ${numErrors} errors, ${numWarnings} warnings, ${numInfos} infos`);
    for (const m of report.issues.messages.slice(0, 20)) {
      console.log(`  [${m.severity}] ${m.code} ${m.pointer || ""} ${m.message}`);
    }
    process.exit(numErrors === 0 ? 0 : 1);
  })
  .catch((err) => {
    console.error(String(err));
    process.exit(1);
  });
