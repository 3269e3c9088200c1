/**
 * Convolutional backbones whose tagged layers serve as image descriptors.
 *
 * Two compact architectures are defined: a face-descriptor-style stack and
 * a generic-object-style stack. Both expose an "fc6" layer of 4096 units
 * (the default descriptor) and a smaller "fc7" on top. Weights load from a
 * JSON weights file; `generateWeights` writes a deterministic seeded file
 * so the full pipeline is testable without real pretrained weights.
 * Converting real weights into the same file format is an offline step
 * documented in the README.
 */

import * as tf from '@tensorflow/tfjs'
import { readFileSync, writeFileSync } from 'fs'
import { mulberry32 } from './rng.js'

export const INPUT_SIZE = 64
export const WEIGHTS_FORMAT = 'f2be-backbone-weights'
export const WEIGHTS_VERSION = 1

export type BackboneKind = 'face-descriptor' | 'generic-object'
export const BACKBONES: BackboneKind[] = ['face-descriptor', 'generic-object']

export function buildBackbone(kind: BackboneKind): tf.Sequential {
  const model = tf.sequential({ name: kind })
  const input = { inputShape: [INPUT_SIZE, INPUT_SIZE, 3] as [number, number, number] }
  if (kind === 'face-descriptor') {
    model.add(tf.layers.conv2d({ ...input, name: 'conv1', filters: 16, kernelSize: 5, strides: 2, activation: 'relu', padding: 'same' }))
    model.add(tf.layers.maxPooling2d({ name: 'pool1', poolSize: 2 }))
    model.add(tf.layers.conv2d({ name: 'conv2', filters: 32, kernelSize: 3, strides: 2, activation: 'relu', padding: 'same' }))
    model.add(tf.layers.maxPooling2d({ name: 'pool2', poolSize: 2 }))
    model.add(tf.layers.flatten({ name: 'flat' }))
    model.add(tf.layers.dense({ name: 'fc6', units: 4096, activation: 'relu' }))
    model.add(tf.layers.dense({ name: 'fc7', units: 512, activation: 'relu' }))
  } else {
    model.add(tf.layers.conv2d({ ...input, name: 'conv1', filters: 8, kernelSize: 7, strides: 4, activation: 'relu', padding: 'same' }))
    model.add(tf.layers.maxPooling2d({ name: 'pool1', poolSize: 2 }))
    model.add(tf.layers.flatten({ name: 'flat' }))
    model.add(tf.layers.dense({ name: 'fc6', units: 4096, activation: 'relu' }))
    model.add(tf.layers.dense({ name: 'fc7', units: 512, activation: 'relu' }))
  }
  return model
}

interface WeightsFile {
  format: string
  version: number
  backbone: BackboneKind
  seed?: number
  layers: Record<string, { shapes: number[][]; data: string[] }>
}

/** Deterministic LeCun-uniform weights for a backbone, written to `path`. */
export function generateWeights(kind: BackboneKind, seed: number, path: string): void {
  const model = buildBackbone(kind)
  const layers: WeightsFile['layers'] = {}
  for (const layer of model.layers) {
    const current = layer.getWeights()
    if (current.length === 0) continue
    const rand = mulberry32(seed ^ hashName(layer.name))
    const shapes: number[][] = []
    const data: string[] = []
    for (const tensor of current) {
      const shape = tensor.shape.slice()
      const size = shape.reduce((a, b) => a * b, 1)
      const fanIn = shape.length > 1 ? size / shape[shape.length - 1] : size
      const scale = Math.sqrt(3.0 / Math.max(1, fanIn))
      const values = new Float32Array(size)
      for (let i = 0; i < size; i++) values[i] = Math.fround((rand() * 2 - 1) * scale)
      shapes.push(shape)
      data.push(Buffer.from(values.buffer).toString('base64'))
    }
    layers[layer.name] = { shapes, data }
  }
  const payload: WeightsFile = {
    format: WEIGHTS_FORMAT,
    version: WEIGHTS_VERSION,
    backbone: kind,
    seed,
    layers,
  }
  writeFileSync(path, JSON.stringify(payload))
  model.dispose()
}

export function loadBackbone(kind: BackboneKind, weightsPath: string): tf.Sequential {
  const raw = JSON.parse(readFileSync(weightsPath, 'utf-8')) as WeightsFile
  if (raw.format !== WEIGHTS_FORMAT) {
    throw new Error(`${weightsPath}: not a backbone weights file`)
  }
  if (raw.version !== WEIGHTS_VERSION) {
    throw new Error(`${weightsPath}: unsupported weights version ${raw.version}`)
  }
  if (raw.backbone !== kind) {
    throw new Error(
      `${weightsPath}: weights are for backbone '${raw.backbone}', requested '${kind}'`,
    )
  }
  const model = buildBackbone(kind)
  for (const layer of model.layers) {
    if (layer.getWeights().length === 0) continue
    const entry = raw.layers[layer.name]
    if (!entry) throw new Error(`${weightsPath}: missing weights for layer ${layer.name}`)
    const tensors = entry.shapes.map((shape, i) => {
      const buf = Buffer.from(entry.data[i], 'base64')
      const values = new Float32Array(buf.buffer, buf.byteOffset, buf.byteLength / 4)
      return tf.tensor(Array.from(values), shape)
    })
    layer.setWeights(tensors)
    tensors.forEach((t) => t.dispose())
  }
  return model
}

/** Sub-model ending at the tagged descriptor layer (fc6, fc7, ...). */
export function descriptorModel(model: tf.Sequential, layerTag: string): tf.LayersModel {
  let layer: tf.layers.Layer
  try {
    layer = model.getLayer(layerTag)
  } catch {
    const names = model.layers.map((l) => l.name).join(', ')
    throw new Error(`unknown layer tag '${layerTag}' (have: ${names})`)
  }
  return tf.model({ inputs: model.inputs, outputs: layer.output as tf.SymbolicTensor })
}

function hashName(name: string): number {
  let h = 2166136261
  for (const ch of name) {
    h ^= ch.charCodeAt(0)
    h = Math.imul(h, 16777619)
  }
  return h >>> 0
}
