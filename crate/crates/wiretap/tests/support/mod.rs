#![allow(dead_code)]
pub mod lp_vertex;
pub mod maxflow;
