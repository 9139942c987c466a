//! Canonical JSON: keys sorted, floats as `%.12e`, non-finite floats as the
//! strings `"+inf"`, `"-inf"` and `"nan"`, two-space indentation, LF.

use std::collections::BTreeMap;
use std::fmt;

use serde::ser::{self, Serialize};

#[derive(Clone, Debug, PartialEq)]
pub enum Canon {
    Null,
    Bool(bool),
    Int(i128),
    Float(f64),
    Str(String),
    Seq(Vec<Canon>),
    Map(BTreeMap<String, Canon>),
}

impl Canon {
    pub fn object<I, K>(entries: I) -> Canon
    where
        I: IntoIterator<Item = (K, Canon)>,
        K: Into<String>,
    {
        Canon::Map(entries.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }

    pub fn get(&self, key: &str) -> Option<&Canon> {
        match self {
            Canon::Map(m) => m.get(key),
            _ => None,
        }
    }

    pub fn insert(&mut self, key: impl Into<String>, value: Canon) {
        if let Canon::Map(m) = self {
            m.insert(key.into(), value);
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out, 0);
        out.push('\n');
        out
    }

    fn write(&self, out: &mut String, indent: usize) {
        match self {
            Canon::Null => out.push_str("null"),
            Canon::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Canon::Int(i) => out.push_str(&i.to_string()),
            Canon::Float(x) => out.push_str(&format_float(*x)),
            Canon::Str(s) => out.push_str(&quote(s)),
            Canon::Seq(items) if items.is_empty() => out.push_str("[]"),
            Canon::Seq(items) => {
                out.push_str("[\n");
                for (k, item) in items.iter().enumerate() {
                    pad(out, indent + 1);
                    item.write(out, indent + 1);
                    out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
                }
                pad(out, indent);
                out.push(']');
            }
            Canon::Map(map) if map.is_empty() => out.push_str("{}"),
            Canon::Map(map) => {
                out.push_str("{\n");
                for (k, (key, value)) in map.iter().enumerate() {
                    pad(out, indent + 1);
                    out.push_str(&quote(key));
                    out.push_str(": ");
                    value.write(out, indent + 1);
                    out.push_str(if k + 1 < map.len() { ",\n" } else { "\n" });
                }
                pad(out, indent);
                out.push('}');
            }
        }
    }
}

fn pad(out: &mut String, indent: usize) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

fn quote(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "\"nan\"".into()
    } else if x == f64::INFINITY {
        "\"+inf\"".into()
    } else if x == f64::NEG_INFINITY {
        "\"-inf\"".into()
    } else {
        format!("{x:.12e}")
    }
}

#[derive(Debug)]
pub struct CanonError(String);

impl fmt::Display for CanonError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CanonError {}

impl ser::Error for CanonError {
    fn custom<T: fmt::Display>(msg: T) -> Self {
        CanonError(msg.to_string())
    }
}

pub fn to_canon<T: Serialize + ?Sized>(value: &T) -> Result<Canon, CanonError> {
    value.serialize(Serializer)
}

/// `to_canon` for values whose serialization cannot fail.
pub fn canon<T: Serialize + ?Sized>(value: &T) -> Canon {
    to_canon(value).expect("report types serialize")
}

struct Serializer;

type R = Result<Canon, CanonError>;

impl ser::Serializer for Serializer {
    type Ok = Canon;
    type Error = CanonError;
    type SerializeSeq = SeqBuilder;
    type SerializeTuple = SeqBuilder;
    type SerializeTupleStruct = SeqBuilder;
    type SerializeTupleVariant = VariantBuilder<SeqBuilder>;
    type SerializeMap = MapBuilder;
    type SerializeStruct = MapBuilder;
    type SerializeStructVariant = VariantBuilder<MapBuilder>;

    fn serialize_bool(self, v: bool) -> R {
        Ok(Canon::Bool(v))
    }
    fn serialize_i8(self, v: i8) -> R {
        Ok(Canon::Int(v.into()))
    }
    fn serialize_i16(self, v: i16) -> R {
        Ok(Canon::Int(v.into()))
    }
    fn serialize_i32(self, v: i32) -> R {
        Ok(Canon::Int(v.into()))
    }
    fn serialize_i64(self, v: i64) -> R {
        Ok(Canon::Int(v.into()))
    }
    fn serialize_u8(self, v: u8) -> R {
        Ok(Canon::Int(v.into()))
    }
    fn serialize_u16(self, v: u16) -> R {
        Ok(Canon::Int(v.into()))
    }
    fn serialize_u32(self, v: u32) -> R {
        Ok(Canon::Int(v.into()))
    }
    fn serialize_u64(self, v: u64) -> R {
        Ok(Canon::Int(v.into()))
    }
    fn serialize_f32(self, v: f32) -> R {
        Ok(Canon::Float(v.into()))
    }
    fn serialize_f64(self, v: f64) -> R {
        Ok(Canon::Float(v))
    }
    fn serialize_char(self, v: char) -> R {
        Ok(Canon::Str(v.to_string()))
    }
    fn serialize_str(self, v: &str) -> R {
        Ok(Canon::Str(v.to_string()))
    }
    fn serialize_bytes(self, v: &[u8]) -> R {
        Ok(Canon::Seq(v.iter().map(|&b| Canon::Int(b.into())).collect()))
    }
    fn serialize_none(self) -> R {
        Ok(Canon::Null)
    }
    fn serialize_some<T: Serialize + ?Sized>(self, value: &T) -> R {
        value.serialize(self)
    }
    fn serialize_unit(self) -> R {
        Ok(Canon::Null)
    }
    fn serialize_unit_struct(self, _: &'static str) -> R {
        Ok(Canon::Null)
    }
    fn serialize_unit_variant(self, _: &'static str, _: u32, variant: &'static str) -> R {
        Ok(Canon::Str(variant.to_string()))
    }
    fn serialize_newtype_struct<T: Serialize + ?Sized>(self, _: &'static str, value: &T) -> R {
        value.serialize(self)
    }
    fn serialize_newtype_variant<T: Serialize + ?Sized>(
        self,
        _: &'static str,
        _: u32,
        variant: &'static str,
        value: &T,
    ) -> R {
        Ok(Canon::object([(variant, value.serialize(Serializer)?)]))
    }
    fn serialize_seq(self, len: Option<usize>) -> Result<SeqBuilder, CanonError> {
        Ok(SeqBuilder(Vec::with_capacity(len.unwrap_or(0))))
    }
    fn serialize_tuple(self, len: usize) -> Result<SeqBuilder, CanonError> {
        self.serialize_seq(Some(len))
    }
    fn serialize_tuple_struct(self, _: &'static str, len: usize) -> Result<SeqBuilder, CanonError> {
        self.serialize_seq(Some(len))
    }
    fn serialize_tuple_variant(
        self,
        _: &'static str,
        _: u32,
        variant: &'static str,
        len: usize,
    ) -> Result<VariantBuilder<SeqBuilder>, CanonError> {
        Ok(VariantBuilder(variant, SeqBuilder(Vec::with_capacity(len))))
    }
    fn serialize_map(self, _: Option<usize>) -> Result<MapBuilder, CanonError> {
        Ok(MapBuilder::default())
    }
    fn serialize_struct(self, _: &'static str, _: usize) -> Result<MapBuilder, CanonError> {
        Ok(MapBuilder::default())
    }
    fn serialize_struct_variant(
        self,
        _: &'static str,
        _: u32,
        variant: &'static str,
        _: usize,
    ) -> Result<VariantBuilder<MapBuilder>, CanonError> {
        Ok(VariantBuilder(variant, MapBuilder::default()))
    }
}

pub struct SeqBuilder(Vec<Canon>);

impl ser::SerializeSeq for SeqBuilder {
    type Ok = Canon;
    type Error = CanonError;
    fn serialize_element<T: Serialize + ?Sized>(&mut self, value: &T) -> Result<(), CanonError> {
        self.0.push(value.serialize(Serializer)?);
        Ok(())
    }
    fn end(self) -> R {
        Ok(Canon::Seq(self.0))
    }
}

impl ser::SerializeTuple for SeqBuilder {
    type Ok = Canon;
    type Error = CanonError;
    fn serialize_element<T: Serialize + ?Sized>(&mut self, value: &T) -> Result<(), CanonError> {
        ser::SerializeSeq::serialize_element(self, value)
    }
    fn end(self) -> R {
        ser::SerializeSeq::end(self)
    }
}

impl ser::SerializeTupleStruct for SeqBuilder {
    type Ok = Canon;
    type Error = CanonError;
    fn serialize_field<T: Serialize + ?Sized>(&mut self, value: &T) -> Result<(), CanonError> {
        ser::SerializeSeq::serialize_element(self, value)
    }
    fn end(self) -> R {
        ser::SerializeSeq::end(self)
    }
}

#[derive(Default)]
pub struct MapBuilder {
    map: BTreeMap<String, Canon>,
    key: Option<String>,
}

impl ser::SerializeMap for MapBuilder {
    type Ok = Canon;
    type Error = CanonError;
    fn serialize_key<T: Serialize + ?Sized>(&mut self, key: &T) -> Result<(), CanonError> {
        self.key = Some(match key.serialize(Serializer)? {
            Canon::Str(s) => s,
            Canon::Int(i) => i.to_string(),
            other => return Err(CanonError(format!("map key must be a string, got {other:?}"))),
        });
        Ok(())
    }
    fn serialize_value<T: Serialize + ?Sized>(&mut self, value: &T) -> Result<(), CanonError> {
        let key = self.key.take().ok_or_else(|| CanonError("value without key".into()))?;
        self.map.insert(key, value.serialize(Serializer)?);
        Ok(())
    }
    fn end(self) -> R {
        Ok(Canon::Map(self.map))
    }
}

impl ser::SerializeStruct for MapBuilder {
    type Ok = Canon;
    type Error = CanonError;
    fn serialize_field<T: Serialize + ?Sized>(&mut self, key: &'static str, value: &T) -> Result<(), CanonError> {
        self.map.insert(key.to_string(), value.serialize(Serializer)?);
        Ok(())
    }
    fn end(self) -> R {
        Ok(Canon::Map(self.map))
    }
}

pub struct VariantBuilder<B>(&'static str, B);

impl ser::SerializeTupleVariant for VariantBuilder<SeqBuilder> {
    type Ok = Canon;
    type Error = CanonError;
    fn serialize_field<T: Serialize + ?Sized>(&mut self, value: &T) -> Result<(), CanonError> {
        ser::SerializeSeq::serialize_element(&mut self.1, value)
    }
    fn end(self) -> R {
        Ok(Canon::object([(self.0, Canon::Seq(self.1 .0))]))
    }
}

impl ser::SerializeStructVariant for VariantBuilder<MapBuilder> {
    type Ok = Canon;
    type Error = CanonError;
    fn serialize_field<T: Serialize + ?Sized>(&mut self, key: &'static str, value: &T) -> Result<(), CanonError> {
        ser::SerializeStruct::serialize_field(&mut self.1, key, value)
    }
    fn end(self) -> R {
        Ok(Canon::object([(self.0, Canon::Map(self.1.map))]))
    }
}
